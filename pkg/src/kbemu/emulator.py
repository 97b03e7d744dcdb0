"""Bayes linear emulation with known axis-aligned boundaries.

The prior for a deterministic simulator f is second order: constant mean
beta, variance sigma2, and a separable Gaussian correlation over the input
box. When f is known analytically on one or two axis-aligned hyperplanes
(a "boundary"), the update by that knowledge has closed forms: the value of
f at the orthogonal projection of x onto a boundary carries all the
information the whole boundary holds about f(x). Three arrangements are
supported:

* a single boundary K,
* two perpendicular boundaries K and L (distinct axes),
* two parallel boundaries K and L (same axis, distinct locations), with
  queries restricted to the slab between them.

Training runs are folded in afterwards by a standard Bayes linear adjustment
whose prior moments are the boundary-updated ones. `brute_force_update`
implements the same posterior by brute numeric conditioning on an explicit
point set; it exists as an independent cross-check of the analytic path and
runs in extended precision where the platform provides it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpotrf, dpotrs

from .errors import (
    ConditioningError,
    ConfigError,
    DegenerateBoundaryError,
    DomainError,
    InvalidParameterError,
    ModelEvaluationError,
    NumericalConsistencyError,
    ShapeError,
    UsageError,
)
from .kernel import DEGENERACY_FLOOR, KernelSpec

ON_BOUNDARY_TOL = 1e-12
DUPLICATE_TOL = 1e-12
JITTER_DEFAULT = 1e-10
JITTER_MAX = 1e-6
# Parallel boundaries closer than this multiple of theta are rejected outright.
MIN_PARALLEL_SEPARATION = 1e-6
# query_var may round to a tiny negative value; clip within this of zero,
# treat anything more negative as a real inconsistency.
VAR_CLIP = 1e-12


@dataclass(frozen=True)
class PriorSpec:
    """Second-order prior: constant mean, constant variance, product kernel."""

    beta: float
    sigma2: float
    kernel: KernelSpec

    def __post_init__(self):
        beta = float(self.beta)
        sigma2 = float(self.sigma2)
        if not math.isfinite(beta):
            raise InvalidParameterError(f"beta must be finite, got {beta}")
        if not math.isfinite(sigma2) or sigma2 <= 0.0:
            raise InvalidParameterError(f"sigma2 must be positive and finite, got {sigma2}")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def dim(self) -> int:
        return self.kernel.dim


@dataclass(frozen=True)
class AxisBoundary:
    """An axis-aligned hyperplane {x : x[axis] == location} where f is known.

    `evaluator` returns f at a point lying on the hyperplane. It is only
    ever called at such points; `value` enforces that.  `name` identifies a
    registry-backed evaluator for serialization and may be None for ad hoc
    boundaries.
    """

    axis: int
    location: float
    evaluator: Callable[[np.ndarray], float]
    name: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.axis, (int, np.integer)) or isinstance(self.axis, bool):
            raise InvalidParameterError(f"axis must be an integer, got {self.axis!r}")
        if self.axis < 0:
            raise InvalidParameterError(f"axis must be nonnegative, got {self.axis}")
        object.__setattr__(self, "axis", int(self.axis))
        loc = float(self.location)
        if not math.isfinite(loc):
            raise InvalidParameterError(f"location must be finite, got {loc}")
        object.__setattr__(self, "location", loc)
        if not callable(self.evaluator):
            raise InvalidParameterError("evaluator must be callable")

    def value(self, x) -> float:
        """Evaluate the known boundary function at a point on the hyperplane."""
        x = np.asarray(x, dtype=float)
        if abs(x[self.axis] - self.location) > ON_BOUNDARY_TOL:
            raise UsageError(
                f"point with x[{self.axis}] = {x[self.axis]} is not on the boundary "
                f"x[{self.axis}] = {self.location}"
            )
        out = float(self.evaluator(x))
        if not math.isfinite(out):
            raise ModelEvaluationError(f"boundary evaluator returned {out} at {x.tolist()}")
        return out


@dataclass(frozen=True)
class SingleBoundary:
    boundary: AxisBoundary


@dataclass(frozen=True)
class TwoPerpendicularBoundaries:
    first: AxisBoundary
    second: AxisBoundary

    def __post_init__(self):
        if self.first.axis == self.second.axis:
            raise InvalidParameterError(
                "perpendicular boundaries need distinct axes, both are "
                f"{self.first.axis}"
            )


@dataclass(frozen=True)
class TwoParallelBoundaries:
    first: AxisBoundary
    second: AxisBoundary

    def __post_init__(self):
        if self.first.axis != self.second.axis:
            raise InvalidParameterError(
                f"parallel boundaries need a shared axis, got {self.first.axis} "
                f"and {self.second.axis}"
            )
        if self.first.location == self.second.location:
            raise InvalidParameterError("parallel boundaries must have distinct locations")

    @property
    def axis(self) -> int:
        return self.first.axis

    @property
    def separation(self) -> float:
        return abs(self.second.location - self.first.location)

    @property
    def low(self) -> AxisBoundary:
        return self.first if self.first.location <= self.second.location else self.second

    @property
    def high(self) -> AxisBoundary:
        return self.second if self.first.location <= self.second.location else self.first


BoundaryConfig = Union[SingleBoundary, TwoPerpendicularBoundaries, TwoParallelBoundaries]


def config_boundaries(boundaries: Optional[BoundaryConfig]) -> tuple[AxisBoundary, ...]:
    """The individual hyperplanes of a configuration, in declaration order."""
    if boundaries is None:
        return ()
    if isinstance(boundaries, SingleBoundary):
        return (boundaries.boundary,)
    if isinstance(boundaries, (TwoPerpendicularBoundaries, TwoParallelBoundaries)):
        return (boundaries.first, boundaries.second)
    raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")


def project(x, boundary: AxisBoundary):
    """Distance to a boundary and the orthogonal projection onto it.

    Returns (a, xK) where a = |x[axis] - location| >= 0 and xK equals x with
    the boundary axis coordinate replaced by the boundary location.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"project expects a single point, got shape {x.shape}")
    if boundary.axis >= x.shape[0]:
        raise ShapeError(
            f"boundary axis {boundary.axis} out of range for a {x.shape[0]}-dim point"
        )
    xK = x.copy()
    xK[boundary.axis] = boundary.location
    return abs(float(x[boundary.axis]) - boundary.location), xK


def _project_rows(X: np.ndarray, boundary: AxisBoundary) -> np.ndarray:
    P = X.copy()
    P[:, boundary.axis] = boundary.location
    return P


def _validate_config(prior: PriorSpec, boundaries: Optional[BoundaryConfig]) -> None:
    for b in config_boundaries(boundaries):
        if b.axis >= prior.dim:
            raise ShapeError(
                f"boundary axis {b.axis} out of range for a {prior.dim}-dim prior"
            )
    if isinstance(boundaries, TwoParallelBoundaries):
        theta = prior.kernel.theta(boundaries.axis)
        c = boundaries.separation
        if c < MIN_PARALLEL_SEPARATION * theta:
            raise DegenerateBoundaryError(
                f"parallel separation {c} is below {MIN_PARALLEL_SEPARATION} * theta "
                f"(theta = {theta})"
            )
        rc = math.exp(-((c / theta) ** 2))
        if 1.0 - rc * rc < DEGENERACY_FLOOR:
            raise DegenerateBoundaryError(
                f"parallel separation {c} with theta {theta} is numerically degenerate"
            )


def _as_points(x, dim: int):
    """Coerce to (m, dim) float array; also report whether input was a single point."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != dim:
        raise ShapeError(f"expected points of dimension {dim}, got array shape {np.shape(x)}")
    if not np.all(np.isfinite(X)):
        raise InvalidParameterError("points must be finite")
    return X, single


def _r1(delta: np.ndarray, theta: float) -> np.ndarray:
    return np.exp(-np.square(delta / theta))


def _offaxis_corr(X: np.ndarray, X2: np.ndarray, kernel: KernelSpec, skip: frozenset) -> np.ndarray:
    # Product correlation over the axes not in `skip`. Iterates axes in
    # ascending order so the result is bitwise identical however the skipped
    # axes were labeled.
    out = np.ones((X.shape[0], X2.shape[0]))
    for j in range(X.shape[1]):
        if j in skip:
            continue
        d = (X[:, j, None] - X2[None, :, j]) / kernel.theta(j)
        out *= np.exp(-np.square(d))
    return out


def _eval_on_boundary(boundary: AxisBoundary, P: np.ndarray) -> np.ndarray:
    vals = np.empty(P.shape[0])
    for i, p in enumerate(P):
        v = float(boundary.evaluator(p))
        if not math.isfinite(v):
            raise ModelEvaluationError(
                f"boundary evaluator {boundary.name or boundary.evaluator!r} returned "
                f"{v} at {p.tolist()}"
            )
        vals[i] = v
    return vals


def _snap(offsets: np.ndarray) -> np.ndarray:
    out = offsets.copy()
    out[np.abs(out) <= ON_BOUNDARY_TOL] = 0.0
    return out


def _parallel_geometry(X: np.ndarray, prior: PriorSpec, cfg: TwoParallelBoundaries):
    """Signed offsets from the `first` boundary, validated to lie in the slab."""
    axis = cfg.axis
    lo = cfg.low.location
    hi = cfg.high.location
    coords = X[:, axis]
    bad = (coords < lo - ON_BOUNDARY_TOL) | (coords > hi + ON_BOUNDARY_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise DomainError(
            f"point with x[{axis}] = {coords[i]} lies outside the slab "
            f"[{lo}, {hi}] between the parallel boundaries"
        )
    a = _snap(coords - cfg.first.location)
    b = _snap(coords - cfg.second.location)
    return a, b


def _mean0(X: np.ndarray, prior: PriorSpec, boundaries: Optional[BoundaryConfig]) -> np.ndarray:
    """Prior-given-boundary mean at each row of X."""
    beta = prior.beta
    if boundaries is None:
        return np.full(X.shape[0], beta)

    if isinstance(boundaries, SingleBoundary):
        K = boundaries.boundary
        th = prior.kernel.theta(K.axis)
        a = _snap(X[:, K.axis] - K.location)
        fK = _eval_on_boundary(K, _project_rows(X, K))
        out = beta + _r1(a, th) * (fK - beta)
        on = a == 0.0
        if np.any(on):
            out[on] = fK[on]
        return out

    if isinstance(boundaries, TwoPerpendicularBoundaries):
        K, L = boundaries.first, boundaries.second
        thK = prior.kernel.theta(K.axis)
        thL = prior.kernel.theta(L.axis)
        a = _snap(X[:, K.axis] - K.location)
        b = _snap(X[:, L.axis] - L.location)
        PK = _project_rows(X, K)
        PL = _project_rows(X, L)
        PKL = _project_rows(PK, L)
        fK = _eval_on_boundary(K, PK)
        fL = _eval_on_boundary(L, PL)
        fKL = _eval_on_boundary(K, PKL)
        rK = _r1(a, thK)
        rL = _r1(b, thL)
        out = beta + rK * (fK - beta) + rL * (fL - beta) - rK * rL * (fKL - beta)
        onK = a == 0.0
        onL = b == 0.0
        if np.any(onK):
            out[onK] = fK[onK]
        if np.any(onL):
            out[onL] = fL[onL]
        return out

    if isinstance(boundaries, TwoParallelBoundaries):
        K, L = boundaries.first, boundaries.second
        th = prior.kernel.theta(boundaries.axis)
        a, b = _parallel_geometry(X, prior, boundaries)
        c = boundaries.separation
        rc = math.exp(-((c / th) ** 2))
        denom = 1.0 - rc * rc
        ra = _r1(a, th)
        rb = _r1(b, th)
        wK = (ra - rb * rc) / denom
        wL = (rb - ra * rc) / denom
        fK = _eval_on_boundary(K, _project_rows(X, K))
        fL = _eval_on_boundary(L, _project_rows(X, L))
        out = beta + wK * (fK - beta) + wL * (fL - beta)
        onK = a == 0.0
        onL = b == 0.0
        if np.any(onK):
            out[onK] = fK[onK]
        if np.any(onL):
            out[onL] = fL[onL]
        return out

    raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")


def _var0(X: np.ndarray, prior: PriorSpec, boundaries: Optional[BoundaryConfig]) -> np.ndarray:
    """Prior-given-boundary variance at each row of X."""
    s2 = prior.sigma2
    if boundaries is None:
        return np.full(X.shape[0], s2)

    if isinstance(boundaries, SingleBoundary):
        K = boundaries.boundary
        th = prior.kernel.theta(K.axis)
        a = _snap(X[:, K.axis] - K.location)
        r = _r1(a, th)
        return s2 * (1.0 - r * r)

    if isinstance(boundaries, TwoPerpendicularBoundaries):
        K, L = boundaries.first, boundaries.second
        a = _snap(X[:, K.axis] - K.location)
        b = _snap(X[:, L.axis] - L.location)
        rK = _r1(a, prior.kernel.theta(K.axis))
        rL = _r1(b, prior.kernel.theta(L.axis))
        return s2 * (1.0 - rK * rK) * (1.0 - rL * rL)

    if isinstance(boundaries, TwoParallelBoundaries):
        th = prior.kernel.theta(boundaries.axis)
        a, b = _parallel_geometry(X, prior, boundaries)
        c = boundaries.separation
        rc = math.exp(-((c / th) ** 2))
        denom = 1.0 - rc * rc
        ra = _r1(a, th)
        rb = _r1(b, th)
        out = s2 / denom * (denom - ra * ra - rb * rb + 2.0 * rc * ra * rb)
        out[(a == 0.0) | (b == 0.0)] = 0.0
        return out

    raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")


def _cov0(
    X: np.ndarray, X2: np.ndarray, prior: PriorSpec, boundaries: Optional[BoundaryConfig]
) -> np.ndarray:
    """Prior-given-boundary covariance matrix between rows of X and of X2."""
    s2 = prior.sigma2
    kern = prior.kernel
    if boundaries is None:
        return s2 * _offaxis_corr(X, X2, kern, frozenset())

    if isinstance(boundaries, SingleBoundary):
        K = boundaries.boundary
        th = kern.theta(K.axis)
        a = _snap(X[:, K.axis] - K.location)
        a2 = _snap(X2[:, K.axis] - K.location)
        R = _r1(a[:, None] - a2[None, :], th) - np.outer(_r1(a, th), _r1(a2, th))
        return s2 * R * _offaxis_corr(X, X2, kern, frozenset({K.axis}))

    if isinstance(boundaries, TwoPerpendicularBoundaries):
        K, L = boundaries.first, boundaries.second
        thK = kern.theta(K.axis)
        thL = kern.theta(L.axis)
        a = _snap(X[:, K.axis] - K.location)
        a2 = _snap(X2[:, K.axis] - K.location)
        b = _snap(X[:, L.axis] - L.location)
        b2 = _snap(X2[:, L.axis] - L.location)
        RK = _r1(a[:, None] - a2[None, :], thK) - np.outer(_r1(a, thK), _r1(a2, thK))
        RL = _r1(b[:, None] - b2[None, :], thL) - np.outer(_r1(b, thL), _r1(b2, thL))
        return s2 * RK * RL * _offaxis_corr(X, X2, kern, frozenset({K.axis, L.axis}))

    if isinstance(boundaries, TwoParallelBoundaries):
        th = kern.theta(boundaries.axis)
        a, _ = _parallel_geometry(X, prior, boundaries)
        a2, _ = _parallel_geometry(X2, prior, boundaries)
        # Signed offset of the second hyperplane from the first along the axis.
        csep = boundaries.second.location - boundaries.first.location
        rc = _r1(np.asarray(csep), th)
        Rcc = 1.0 - rc * rc
        ra = _r1(a, th)
        ra2 = _r1(a2, th)
        Raa = _r1(a[:, None] - a2[None, :], th) - np.outer(ra, ra2)
        Rac = _r1(a - csep, th) - ra * rc
        Rca = _r1(a2 - csep, th) - ra2 * rc
        R = Raa - np.outer(Rac, Rca) / Rcc
        return s2 * R * _offaxis_corr(X, X2, kern, frozenset({boundaries.axis}))

    raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")


def boundary_mean(x, prior: PriorSpec, boundaries: BoundaryConfig):
    """Expectation of f(x) given the boundary knowledge alone.

    `x` may be one point (returns float) or an (m, d) array (returns (m,)).
    Raises UsageError when called without a boundary configuration.
    """
    if boundaries is None:
        raise UsageError("boundary_mean needs a boundary configuration; prior mean is beta")
    _validate_config(prior, boundaries)
    X, single = _as_points(x, prior.dim)
    out = _mean0(X, prior, boundaries)
    return float(out[0]) if single else out


def boundary_var(x, prior: PriorSpec, boundaries: BoundaryConfig):
    """Variance of f(x) given the boundary knowledge alone."""
    if boundaries is None:
        raise UsageError("boundary_var needs a boundary configuration; prior variance is sigma2")
    _validate_config(prior, boundaries)
    X, single = _as_points(x, prior.dim)
    out = _var0(X, prior, boundaries)
    return float(out[0]) if single else out


def boundary_cov(x, x2, prior: PriorSpec, boundaries: BoundaryConfig):
    """Covariance of f(x), f(x2) given the boundary knowledge alone."""
    if boundaries is None:
        raise UsageError("boundary_cov needs a boundary configuration")
    _validate_config(prior, boundaries)
    X, single = _as_points(x, prior.dim)
    X2, single2 = _as_points(x2, prior.dim)
    out = _cov0(X, X2, prior, boundaries)
    return float(out[0, 0]) if single and single2 else out


@dataclass(frozen=True)
class TrainingSet:
    """Simulator runs: points (n, d) with outputs values (n,).

    Points must be finite and pairwise distinct (no two within 1e-12 in the
    max norm). An optional box (d, 2) of [low, high] columns is enforced
    when given. n = 0 is a valid, empty training set.
    """

    points: np.ndarray
    values: np.ndarray
    box: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if pts.ndim != 2:
            raise ShapeError(f"points must be 2-d (n, d), got shape {pts.shape}")
        if vals.shape != (pts.shape[0],):
            raise ShapeError(
                f"values shape {vals.shape} does not match {pts.shape[0]} points"
            )
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("training points must be finite")
        if not np.all(np.isfinite(vals)):
            raise InvalidParameterError("training values must be finite")
        n = pts.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                if np.max(np.abs(pts[i] - pts[j])) <= DUPLICATE_TOL:
                    raise InvalidParameterError(
                        f"training points {i} and {j} coincide within {DUPLICATE_TOL}"
                    )
        box = self.box
        if box is not None:
            box = np.asarray(box, dtype=float)
            if box.shape != (pts.shape[1], 2):
                raise ShapeError(f"box must have shape ({pts.shape[1]}, 2), got {box.shape}")
            if np.any(pts < box[:, 0]) or np.any(pts > box[:, 1]):
                raise DomainError("training points must lie inside the declared box")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "box", box)

    @classmethod
    def empty(cls, dim: int) -> "TrainingSet":
        return cls(points=np.empty((0, dim)), values=np.empty(0))

    @property
    def n(self) -> int:
        return self.points.shape[0]


def _factor_spd(A: np.ndarray, sigma2: float, jitter: float):
    """Cholesky of A + j*sigma2*I with jitter escalation.

    Returns (lower_factor, jitter_used). Escalates j by factors of 10 from
    `jitter` up to JITTER_MAX, then raises ConditioningError naming the pivot
    where factorization failed.
    """
    if not (jitter >= 0.0 and math.isfinite(jitter)):
        raise InvalidParameterError(f"jitter must be nonnegative and finite, got {jitter}")
    n = A.shape[0]
    if n == 0:
        return np.empty((0, 0)), jitter
    j = jitter
    info = 0
    while True:
        M = A + (j * sigma2) * np.eye(n)
        L, info = dpotrf(M, lower=1, clean=1, overwrite_a=1)
        if info == 0:
            return L, j
        if j >= JITTER_MAX:
            raise ConditioningError(
                f"covariance matrix not positive definite at leading minor {info} "
                f"even with jitter {j:.1e} * sigma2",
                pivot=int(info),
                jitter=j,
            )
        j = min(j * 10.0 if j > 0.0 else JITTER_DEFAULT, JITTER_MAX)


@dataclass
class AdjustedEmulator:
    """Posterior emulator: boundary knowledge plus a Bayes linear adjustment by runs.

    Build with `build_adjusted`. Queries accept a single point (d,) or a
    batch (m, d) and return a float or an (m,) array accordingly.
    """

    prior: PriorSpec
    boundaries: Optional[BoundaryConfig]
    training: TrainingSet
    jitter_used: float
    _chol: np.ndarray = field(repr=False)
    _alpha: np.ndarray = field(repr=False)

    @property
    def n_train(self) -> int:
        return self.training.n

    def _cross(self, X: np.ndarray) -> np.ndarray:
        return _cov0(self.training.points, X, self.prior, self.boundaries)

    def mean(self, x):
        X, single = _as_points(x, self.prior.dim)
        out = _mean0(X, self.prior, self.boundaries)
        if self.n_train:
            out = out + self._cross(X).T @ self._alpha
        return float(out[0]) if single else out

    def var(self, x):
        X, single = _as_points(x, self.prior.dim)
        out = _var0(X, self.prior, self.boundaries)
        if self.n_train:
            u = solve_triangular(self._chol, self._cross(X), lower=True)
            out = out - np.sum(u * u, axis=0)
        out = self._clip_var(out)
        return float(out[0]) if single else out

    def cov(self, x, x2):
        X, single = _as_points(x, self.prior.dim)
        X2, single2 = _as_points(x2, self.prior.dim)
        out = _cov0(X, X2, self.prior, self.boundaries)
        if self.n_train:
            u = solve_triangular(self._chol, self._cross(X), lower=True)
            u2 = solve_triangular(self._chol, self._cross(X2), lower=True)
            out = out - u.T @ u2
        return float(out[0, 0]) if single and single2 else out

    def _clip_var(self, v: np.ndarray) -> np.ndarray:
        floor = -VAR_CLIP * self.prior.sigma2
        bad = v < floor
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericalConsistencyError(
                f"negative posterior variance {v[i]:.3e} below the clip floor "
                f"{floor:.3e}; the training covariance is too ill conditioned"
            )
        return np.where(v < 0.0, 0.0, v)


def build_adjusted(
    prior: PriorSpec,
    boundaries: Optional[BoundaryConfig],
    training: TrainingSet,
    jitter: float = JITTER_DEFAULT,
) -> AdjustedEmulator:
    """Adjust the (boundary-updated) prior by a set of simulator runs.

    The boundary knowledge enters through closed-form prior moments; the
    training runs then update those moments by the usual Bayes linear
    formulas. Training points may not lie on a boundary (their projections
    would coincide with themselves) and, for a parallel pair, must lie in
    the slab between the two hyperplanes.
    """
    _validate_config(prior, boundaries)
    pts = training.points
    if pts.shape[1] != prior.dim:
        raise ShapeError(
            f"training dimension {pts.shape[1]} does not match prior dimension {prior.dim}"
        )
    for b in config_boundaries(boundaries):
        offsets = np.abs(pts[:, b.axis] - b.location)
        if np.any(offsets <= ON_BOUNDARY_TOL):
            i = int(np.argmax(offsets <= ON_BOUNDARY_TOL))
            raise InvalidParameterError(
                f"training point {i} lies on the boundary x[{b.axis}] = {b.location}; "
                "boundary values are already known exactly"
            )
    if isinstance(boundaries, TwoParallelBoundaries):
        _parallel_geometry(pts, prior, boundaries)

    if training.n == 0:
        return AdjustedEmulator(
            prior=prior,
            boundaries=boundaries,
            training=training,
            jitter_used=jitter,
            _chol=np.empty((0, 0)),
            _alpha=np.empty(0),
        )

    C = _cov0(pts, pts, prior, boundaries)
    L, jused = _factor_spd(C, prior.sigma2, jitter)
    resid = training.values - _mean0(pts, prior, boundaries)
    z, info = dpotrs(L, resid[:, None], lower=1)
    if info != 0:
        raise ConditioningError(f"triangular solve failed with info {info}")
    return AdjustedEmulator(
        prior=prior,
        boundaries=boundaries,
        training=training,
        jitter_used=jused,
        _chol=L,
        _alpha=z[:, 0],
    )


def query_mean(em: AdjustedEmulator, x):
    """Posterior mean at x. Same as em.mean(x)."""
    return em.mean(x)


def query_var(em: AdjustedEmulator, x):
    """Posterior variance at x. Same as em.var(x)."""
    return em.var(x)


def query_cov(em: AdjustedEmulator, x, x2):
    """Posterior covariance between f(x) and f(x2). Same as em.cov(x, x2)."""
    return em.cov(x, x2)


def _dedupe(points: np.ndarray) -> np.ndarray:
    keep: list[int] = []
    for i in range(points.shape[0]):
        dup = False
        for j in keep:
            if np.max(np.abs(points[i] - points[j])) <= DUPLICATE_TOL:
                dup = True
                break
        if not dup:
            keep.append(i)
    return points[keep]


def blackbox_augmented_points(
    training_points, x, boundaries: BoundaryConfig
) -> np.ndarray:
    """The finite point set whose values carry all boundary information about f(x).

    For a single boundary K these are the training points, their projections
    onto K, and the projection of x itself; for two perpendicular boundaries
    additionally the projections onto L and onto the intersection; for two
    parallel boundaries the projections onto each. Duplicates (within 1e-12)
    are dropped, keeping first occurrences. Conditioning a plain prior on
    f at these points reproduces the closed-form boundary update at x
    exactly, which is what `brute_force_update` verifies.
    """
    if boundaries is None:
        raise UsageError("blackbox_augmented_points needs a boundary configuration")
    X = np.atleast_2d(np.asarray(training_points, dtype=float))
    if X.size == 0:
        X = X.reshape(0, np.asarray(x).shape[-1])
    xq = np.asarray(x, dtype=float).reshape(1, -1)
    if X.shape[1] != xq.shape[1]:
        raise ShapeError(
            f"training dimension {X.shape[1]} does not match query dimension {xq.shape[1]}"
        )
    both = np.vstack([X, xq])

    if isinstance(boundaries, SingleBoundary):
        K = boundaries.boundary
        parts = [X, _project_rows(both, K)]
    elif isinstance(boundaries, TwoPerpendicularBoundaries):
        K, L = boundaries.first, boundaries.second
        PK = _project_rows(both, K)
        PL = _project_rows(both, L)
        PKL = _project_rows(PK, L)
        parts = [X, PK, PL, PKL]
    elif isinstance(boundaries, TwoParallelBoundaries):
        K, L = boundaries.first, boundaries.second
        parts = [X, _project_rows(both, K), _project_rows(both, L)]
    else:
        raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")
    return _dedupe(np.vstack(parts))


def blackbox_augmented_data(
    training: TrainingSet, x, boundaries: BoundaryConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Augmented points together with their known values.

    Training points keep their recorded outputs; projected points take the
    owning boundary evaluator's value. Projections onto an intersection lie
    on both hyperplanes and use the first boundary's evaluator (a consistent
    model gives the same value either way).
    """
    if boundaries is None:
        raise UsageError("blackbox_augmented_data needs a boundary configuration")
    X = training.points
    xq = np.asarray(x, dtype=float).reshape(1, -1)
    both = np.vstack([X, xq])

    pieces: list[tuple[np.ndarray, np.ndarray]] = [(X, training.values)]
    if isinstance(boundaries, SingleBoundary):
        K = boundaries.boundary
        P = _project_rows(both, K)
        pieces.append((P, _eval_on_boundary(K, P)))
    elif isinstance(boundaries, TwoPerpendicularBoundaries):
        K, L = boundaries.first, boundaries.second
        PK = _project_rows(both, K)
        PL = _project_rows(both, L)
        PKL = _project_rows(PK, L)
        pieces.append((PK, _eval_on_boundary(K, PK)))
        pieces.append((PL, _eval_on_boundary(L, PL)))
        pieces.append((PKL, _eval_on_boundary(K, PKL)))
    elif isinstance(boundaries, TwoParallelBoundaries):
        K, L = boundaries.first, boundaries.second
        PK = _project_rows(both, K)
        PL = _project_rows(both, L)
        pieces.append((PK, _eval_on_boundary(K, PK)))
        pieces.append((PL, _eval_on_boundary(L, PL)))
    else:
        raise InvalidParameterError(f"not a boundary configuration: {boundaries!r}")

    pts = np.vstack([p for p, _ in pieces])
    vals = np.concatenate([v for _, v in pieces])
    keep: list[int] = []
    for i in range(pts.shape[0]):
        if not any(np.max(np.abs(pts[i] - pts[j])) <= DUPLICATE_TOL for j in keep):
            keep.append(i)
    return pts[keep], vals[keep]


def _chol_longdouble(A: np.ndarray):
    """Left-looking Cholesky in extended precision. Returns (L, failed_pivot)."""
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0.0:
            return L, j + 1
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L, 0


def brute_force_update(
    points,
    values,
    prior: PriorSpec,
    x,
    x2=None,
    jitter: float = JITTER_DEFAULT,
) -> tuple[float, float, float]:
    """Condition the plain prior on explicit (point, value) pairs; no boundary algebra.

    Returns (mean, var, cov) at x, where cov is Cov[f(x), f(x2)] when x2 is
    given and equals var otherwise. This is the reference implementation the
    closed-form boundary update is checked against; it runs in extended
    precision where the platform supports it and applies the same escalating
    jitter policy as `build_adjusted`.
    """
    P = np.atleast_2d(np.asarray(points, dtype=np.longdouble))
    v = np.asarray(values, dtype=np.longdouble).ravel()
    if P.shape[0] != v.shape[0]:
        raise ShapeError(f"{P.shape[0]} points but {v.shape[0]} values")
    if P.shape[1] != prior.dim:
        raise ShapeError(f"point dimension {P.shape[1]} does not match prior dim {prior.dim}")
    if not (jitter >= 0.0 and math.isfinite(jitter)):
        raise InvalidParameterError(f"jitter must be nonnegative and finite, got {jitter}")
    xq = np.asarray(x, dtype=np.longdouble).ravel()
    x2q = xq if x2 is None else np.asarray(x2, dtype=np.longdouble).ravel()
    if xq.shape[0] != prior.dim or x2q.shape[0] != prior.dim:
        raise ShapeError("query dimension does not match prior dimension")

    beta = np.longdouble(prior.beta)
    s2 = np.longdouble(prior.sigma2)
    thetas = np.asarray(prior.kernel.thetas, dtype=np.longdouble)

    def corr(A: np.ndarray, B: np.ndarray) -> np.ndarray:
        D = (A[:, None, :] - B[None, :, :]) / thetas
        return np.exp(-np.sum(D * D, axis=2))

    n = P.shape[0]
    r_xx2 = corr(xq[None, :], x2q[None, :])[0, 0]
    if n == 0:
        mean = beta
        var = s2
        cov = s2 * r_xx2
        return float(mean), float(var), float(cov)

    G0 = s2 * corr(P, P)
    j = jitter
    while True:
        L, bad = _chol_longdouble(G0 + (j * s2) * np.eye(n, dtype=np.longdouble))
        if bad == 0:
            break
        if j >= JITTER_MAX:
            raise ConditioningError(
                f"brute-force covariance not positive definite at leading minor {bad} "
                f"even with jitter {j:.1e} * sigma2",
                pivot=bad,
                jitter=j,
            )
        j = min(j * 10.0 if j > 0.0 else JITTER_DEFAULT, JITTER_MAX)

    def solve_chol(rhs: np.ndarray) -> np.ndarray:
        y = np.zeros_like(rhs)
        for i in range(n):
            y[i] = (rhs[i] - L[i, :i] @ y[:i]) / L[i, i]
        z = np.zeros_like(rhs)
        for i in range(n - 1, -1, -1):
            z[i] = (y[i] - L[i + 1 :, i] @ z[i + 1 :]) / L[i, i]
        return z

    kx = s2 * corr(P, xq[None, :])[:, 0]
    kx2 = s2 * corr(P, x2q[None, :])[:, 0]
    alpha = solve_chol(v - beta)
    w = solve_chol(kx)
    mean = beta + kx @ alpha
    var = s2 - kx @ w
    cov = s2 * r_xx2 - kx2 @ w
    return float(mean), float(var), float(cov)


# ---------------------------------------------------------------------------
# JSON round-trip for emulator configurations (prior + named boundaries).


def emulator_config_to_dict(
    prior: PriorSpec, boundaries: Optional[BoundaryConfig], jitter: float = JITTER_DEFAULT
) -> dict:
    """Serializable form of a prior and its boundary arrangement.

    Boundaries must carry registry names (see kbemu.models.get_boundary);
    ad hoc evaluators have no portable representation.
    """
    blist = []
    for b in config_boundaries(boundaries):
        if b.name is None:
            raise UsageError(
                "only registry-named boundary evaluators can be serialized; "
                f"boundary on axis {b.axis} has no name"
            )
        blist.append(
            {"axis": b.axis, "location": b.location, "builtin_evaluator_name": b.name}
        )
    return {
        "beta": prior.beta,
        "sigma2": prior.sigma2,
        "thetas": list(prior.kernel.thetas),
        "boundaries": blist,
        "jitter": float(jitter),
    }


def emulator_config_from_dict(doc: dict) -> tuple[PriorSpec, Optional[BoundaryConfig], float]:
    """Rebuild (prior, boundaries, jitter) from its serialized form.

    Evaluator names resolve against the models registry; the stored axis and
    location must agree with the registry's definition of that boundary.
    """
    from . import models  # deferred: models builds on this module

    try:
        beta = float(doc["beta"])
        sigma2 = float(doc["sigma2"])
        thetas = [float(t) for t in doc["thetas"]]
        raw_boundaries = doc.get("boundaries", [])
        jitter = float(doc.get("jitter", JITTER_DEFAULT))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed emulator config: {exc}") from exc
    try:
        prior = PriorSpec(beta=beta, sigma2=sigma2, kernel=KernelSpec(thetas=tuple(thetas)))
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from exc

    resolved: list[AxisBoundary] = []
    for entry in raw_boundaries:
        try:
            axis = int(entry["axis"])
            location = float(entry["location"])
            name = str(entry["builtin_evaluator_name"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed boundary entry {entry!r}: {exc}") from exc
        b = models.get_boundary(name)
        if b.axis != axis or b.location != location:
            raise ConfigError(
                f"boundary {name!r} is defined on axis {b.axis} at {b.location}, "
                f"but the config says axis {axis} at {location}"
            )
        resolved.append(b)

    if len(resolved) == 0:
        boundaries: Optional[BoundaryConfig] = None
    elif len(resolved) == 1:
        boundaries = SingleBoundary(resolved[0])
    elif len(resolved) == 2:
        first, second = resolved
        if first.axis == second.axis:
            if first.location == second.location:
                raise ConfigError("two boundaries on the same axis at the same location")
            boundaries = TwoParallelBoundaries(first, second)
        else:
            boundaries = TwoPerpendicularBoundaries(first, second)
    else:
        raise ConfigError(f"at most two boundaries are supported, got {len(resolved)}")

    try:
        _validate_config(prior, boundaries)
    except (ShapeError, DegenerateBoundaryError) as exc:
        raise ConfigError(str(exc)) from exc
    return prior, boundaries, jitter


def emulator_config_to_json(
    prior: PriorSpec, boundaries: Optional[BoundaryConfig], jitter: float = JITTER_DEFAULT
) -> str:
    return json.dumps(emulator_config_to_dict(prior, boundaries, jitter), indent=2, sort_keys=True)


def emulator_config_from_json(text: str) -> tuple[PriorSpec, Optional[BoundaryConfig], float]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return emulator_config_from_dict(doc)
