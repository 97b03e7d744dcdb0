"""Experimental design for boundary-aware emulation.

Besides plain and maximin Latin hypercubes, two boundary-aware tools are
provided. `warp_design` redistributes design coordinates along each
boundary axis so their marginal density follows the variance profile the
boundary leaves unresolved (points migrate away from where the boundary
already pins the simulator down). `greedy_v_optimal` picks design points
one at a time to minimize the total posterior variance over a reference
grid, which only needs variances, never simulator output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq
from scipy.stats import qmc

from .emulator import (
    BoundaryConfig,
    PriorSpec,
    SingleBoundary,
    TrainingSet,
    TwoParallelBoundaries,
    TwoPerpendicularBoundaries,
    _cov0,
    _factor_spd,
    _validate_config,
    _var0,
    config_boundaries,
    JITTER_DEFAULT,
)
from .errors import (
    ConfigError,
    InvalidParameterError,
    ShapeError,
    UsageError,
)
from .kernel import KernelSpec, _warp_integral_signed

MAX_GRID_POINTS = 50_000
MAXIMIN_CANDIDATES_DEFAULT = 100_000
GREEDY_POOL_DEFAULT = 4096
# Candidates whose current variance falls below this times sigma2 carry no
# selectable information (they sit on a boundary or duplicate a pick).
GREEDY_VAR_FLOOR = 1e-12


def _check_box(box, d: int) -> np.ndarray:
    if box is None:
        box = np.column_stack([np.zeros(d), np.ones(d)])
    box = np.asarray(box, dtype=float)
    if box.shape != (d, 2):
        raise ShapeError(f"box must have shape ({d}, 2), got {box.shape}")
    if not np.all(np.isfinite(box)) or np.any(box[:, 0] >= box[:, 1]):
        raise InvalidParameterError("box rows must be finite [low, high) pairs with low < high")
    return box


@dataclass(frozen=True)
class Design:
    """A set of input points with its provenance.

    points : (n, d) array inside box; box : (d, 2) low/high columns;
    seed : RNG seed the construction used; provenance : short method tag.
    """

    points: np.ndarray
    box: np.ndarray
    seed: int
    provenance: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ShapeError(f"points must be 2-d, got shape {pts.shape}")
        box = _check_box(self.box, pts.shape[1])
        if not np.all(np.isfinite(pts)):
            raise InvalidParameterError("design points must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "provenance", str(self.provenance))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def design_to_dict(design: Design) -> dict:
    return {
        "points": design.points.tolist(),
        "box": design.box.tolist(),
        "seed": design.seed,
        "provenance": design.provenance,
    }


def design_from_dict(doc: dict) -> Design:
    try:
        return Design(
            points=np.asarray(doc["points"], dtype=float),
            box=np.asarray(doc["box"], dtype=float),
            seed=int(doc["seed"]),
            provenance=str(doc["provenance"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed design document: {exc}") from exc


def save_design_json(design: Design, path) -> None:
    with open(path, "w") as fh:
        json.dump(design_to_dict(design), fh, indent=2)
        fh.write("\n")


def load_design_json(path) -> Design:
    with open(path) as fh:
        return design_from_dict(json.load(fh))


def save_design_csv(design: Design, path, extra_header: tuple = ()) -> None:
    """CSV with provenance header comments; floats keep full precision."""
    d = design.dim
    with open(path, "w") as fh:
        fh.write(f"# provenance: {design.provenance}\n")
        fh.write(f"# seed: {design.seed}\n")
        fh.write("# box: " + json.dumps(design.box.tolist()) + "\n")
        for line in extra_header:
            fh.write(f"# {line}\n")
        fh.write(",".join(f"x{j}" for j in range(d)) + "\n")
        for row in design.points:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_design_csv(path) -> Design:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
            elif line.startswith("x0"):
                continue
            else:
                rows.append([float(v) for v in line.split(",")])
    try:
        pts = np.asarray(rows, dtype=float)
        return Design(
            points=pts.reshape(len(rows), -1) if rows else np.empty((0, 1)),
            box=np.asarray(json.loads(meta["box"]), dtype=float),
            seed=int(meta["seed"]),
            provenance=meta["provenance"],
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"malformed design CSV {path}: {exc}") from exc


@dataclass(frozen=True)
class CriterionGrid:
    """Reference points over which total posterior variance is accumulated."""

    points: np.ndarray
    box: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise ShapeError(f"grid points must be 2-d, got shape {pts.shape}")
        if pts.shape[0] > MAX_GRID_POINTS:
            raise InvalidParameterError(
                f"criterion grid has {pts.shape[0]} points; the cap is {MAX_GRID_POINTS}"
            )
        box = _check_box(self.box, pts.shape[1])
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "box", box)

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @classmethod
    def tensor(cls, box, resolution) -> "CriterionGrid":
        """Full factorial grid; resolution is an int or a per-axis sequence."""
        box = np.asarray(box, dtype=float)
        d = box.shape[0]
        box = _check_box(box, d)
        if np.isscalar(resolution):
            res = [int(resolution)] * d
        else:
            res = [int(r) for r in resolution]
        if len(res) != d or any(r < 2 for r in res):
            raise InvalidParameterError(f"resolution needs {d} entries >= 2, got {res}")
        m = int(np.prod(res))
        if m > MAX_GRID_POINTS:
            raise InvalidParameterError(
                f"tensor grid would have {m} points; the cap is {MAX_GRID_POINTS}"
            )
        axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, res)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m_.ravel() for m_ in mesh])
        return cls(points=pts, box=box)


def latin_hypercube(n: int, d: int, seed: int, box=None) -> Design:
    """Seeded Latin hypercube: one point per axis stratum, uniform within it."""
    if n < 1 or d < 1:
        raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    box = _check_box(box, d)
    rng = np.random.default_rng(seed)
    u = np.empty((n, d))
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    pts = box[:, 0] + u * (box[:, 1] - box[:, 0])
    return Design(points=pts, box=box, seed=seed, provenance="lhc")


def _min_pairwise_dist_sq(u: np.ndarray) -> float:
    n = u.shape[0]
    if n < 2:
        return math.inf
    diff = u[:, None, :] - u[None, :, :]
    d2 = np.sum(diff * diff, axis=2)
    d2[np.arange(n), np.arange(n)] = math.inf
    return float(d2.min())


def maximin_lhc(
    n: int,
    d: int,
    seed: int,
    box=None,
    num_candidates: int = MAXIMIN_CANDIDATES_DEFAULT,
) -> Design:
    """Best of `num_candidates` random Latin hypercubes by minimum pairwise distance.

    Distances are measured in normalized unit-cube coordinates, so the
    winning candidate does not depend on the box. Ties keep the earliest
    candidate.
    """
    if n < 1 or d < 1:
        raise InvalidParameterError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if num_candidates < 1:
        raise InvalidParameterError(f"need num_candidates >= 1, got {num_candidates}")
    box = _check_box(box, d)
    rng = np.random.default_rng(seed)
    best_u = None
    best_d2 = -math.inf
    chunk = max(1, min(256, num_candidates))
    remaining = num_candidates
    while remaining > 0:
        c = min(chunk, remaining)
        remaining -= c
        # c Latin hypercubes at once: ranks from argsort of uniforms.
        ranks = np.argsort(rng.random((c, n, d)), axis=1)
        u = (ranks + rng.random((c, n, d))) / n
        diff = u[:, :, None, :] - u[:, None, :, :]
        d2 = np.sum(diff * diff, axis=3)
        idx = np.arange(n)
        d2[:, idx, idx] = math.inf
        mins = d2.reshape(c, -1).min(axis=1)
        i = int(np.argmax(mins))
        if mins[i] > best_d2:
            best_d2 = float(mins[i])
            best_u = u[i]
    pts = box[:, 0] + best_u * (box[:, 1] - box[:, 0])
    return Design(points=pts, box=box, seed=seed, provenance="maximin-lhc")


# ---------------------------------------------------------------------------
# Density warp along boundary axes.


def _single_axis_cumulative(theta: float, loc: float, lo: float, hi: float):
    """Cumulative of 1 - r^2(t - loc) over [lo, hi], and its total mass.

    The antiderivative of 1 - r^2 is the warp integral itself, extended
    oddly for coordinates below the boundary location.
    """
    w_lo = float(_warp_integral_signed(np.asarray(lo - loc), theta))

    def cum(t):
        return float(_warp_integral_signed(np.asarray(t - loc), theta)) - w_lo

    return cum, cum(hi)


def _parallel_axis_cumulative(theta: float, c: float):
    """Cumulative of the two-parallel resolved profile over slab offsets [0, c].

    The density is 1 - r^2(c) - r^2(a) - r^2(c - a) + 2 r(c) r(a) r(c - a),
    the unnormalized variance between two parallel boundaries at separation
    c. All terms integrate in closed form through the Gauss error function.
    """
    rc = math.exp(-((c / theta) ** 2))
    amp = theta * math.sqrt(math.pi / 8.0)

    def wq(x):
        # integral of r^2 from 0 to x
        return amp * math.erf(math.sqrt(2.0) * x / theta)

    half = c / 2.0
    cross_scale = math.exp(-(c * c) / (2.0 * theta * theta)) * amp

    def cross(x):
        # integral of r(a) r(c - a) from 0 to x
        return cross_scale * (
            math.erf(math.sqrt(2.0) * (x - half) / theta)
            + math.erf(math.sqrt(2.0) * half / theta)
        )

    def cum(t):
        return (1.0 - rc * rc) * t - wq(t) - (wq(c) - wq(c - t)) + 2.0 * rc * cross(t)

    return cum, float(cum(c))


def _axis_warps(boundaries: BoundaryConfig, kernel: KernelSpec, box: np.ndarray):
    """Per-axis (cumulative, total, target_lo, target_hi) for each warped axis."""
    warps = {}
    if isinstance(boundaries, TwoParallelBoundaries):
        axis = boundaries.axis
        theta = kernel.theta(axis)
        c = boundaries.separation
        cum, total = _parallel_axis_cumulative(theta, c)
        lo = boundaries.low.location
        offset_cum = lambda t, cum=cum, lo=lo: cum(t - lo)
        warps[axis] = (offset_cum, total, lo, lo + c)
    else:
        for b in config_boundaries(boundaries):
            theta = kernel.theta(b.axis)
            lo, hi = box[b.axis]
            cum, total = _single_axis_cumulative(theta, b.location, lo, hi)
            warps[b.axis] = (cum, total, lo, hi)
    return warps


def warp_design(design: Design, boundaries: BoundaryConfig, kernel: KernelSpec) -> Design:
    """Redistribute coordinates along boundary axes by the resolved-variance density.

    Along each boundary axis the warped marginal density is proportional to
    the variance the boundary leaves unresolved: near zero at the boundary
    itself (nothing left to learn there) and saturating away from it. For a
    parallel pair the whole axis range maps onto the slab between the two
    hyperplanes and the design box is narrowed accordingly. Other axes are
    untouched, so Latin hypercube stratification survives on them.

    Each coordinate with box fraction p goes to the t solving
    C(t) = p * C(total), with C the closed-form cumulative; the inversion is
    bracketed bisection on a strictly increasing function, accurate to far
    below coordinate precision.
    """
    if boundaries is None:
        return Design(
            points=design.points.copy(),
            box=design.box,
            seed=design.seed,
            provenance=f"warped({design.provenance})",
        )
    if kernel.dim != design.dim:
        raise ShapeError(
            f"kernel dimension {kernel.dim} does not match design dimension {design.dim}"
        )
    for b in config_boundaries(boundaries):
        if b.axis >= design.dim:
            raise ShapeError(f"boundary axis {b.axis} out of range for dimension {design.dim}")

    warps = _axis_warps(boundaries, kernel, design.box)
    pts = design.points.copy()
    box = design.box.copy()
    for axis, (cum, total, t_lo, t_hi) in warps.items():
        lo, hi = design.box[axis]
        p = (design.points[:, axis] - lo) / (hi - lo)
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise UsageError(f"design points leave the box along axis {axis}; cannot warp")
        out = np.empty_like(p)
        for i, pi in enumerate(p):
            target = pi * total
            if pi <= 0.0:
                out[i] = t_lo
            elif pi >= 1.0:
                out[i] = t_hi
            else:
                out[i] = brentq(
                    lambda t: cum(t) - target, t_lo, t_hi, xtol=1e-13, rtol=8.9e-16
                )
        pts[:, axis] = out
        box[axis] = (t_lo, t_hi)
    return Design(
        points=pts,
        box=box,
        seed=design.seed,
        provenance=f"warped({design.provenance})",
    )


# ---------------------------------------------------------------------------
# V-optimality: total posterior variance over a reference grid.


def v_criterion(
    design,
    grid: CriterionGrid,
    prior: PriorSpec,
    boundaries: Optional[BoundaryConfig],
    jitter: float = JITTER_DEFAULT,
) -> float:
    """Sum over the grid of the posterior variance after running `design`.

    Uses the resolved-variance identity: total posterior variance equals the
    total boundary-conditioned variance minus the variance the design
    resolves, so no simulator output is needed. `design` may be a Design or
    a raw (n, d) array; n = 0 gives the boundary-only baseline (or
    m * sigma2 with no boundaries either).
    """
    _validate_config(prior, boundaries)
    pts = np.asarray(getattr(design, "points", design), dtype=float)
    if pts.size == 0:
        pts = pts.reshape(0, prior.dim)
    if pts.ndim != 2 or pts.shape[1] != prior.dim:
        raise ShapeError(f"design points must be (n, {prior.dim}), got {pts.shape}")
    if grid.points.shape[1] != prior.dim:
        raise ShapeError(
            f"grid dimension {grid.points.shape[1]} does not match prior dimension {prior.dim}"
        )
    base = float(np.sum(_var0(grid.points, prior, boundaries)))
    n = pts.shape[0]
    if n == 0:
        return base
    C = _cov0(pts, pts, prior, boundaries)
    L, _ = _factor_spd(C, prior.sigma2, jitter)
    cross = _cov0(pts, grid.points, prior, boundaries)
    u = solve_triangular(L, cross, lower=True)
    resolved = float(np.sum(u * u))
    return base - resolved


def sobol_pool(m: int, box, seed: int) -> np.ndarray:
    """Scrambled low-discrepancy candidate pool of m points in the box."""
    box = np.asarray(box, dtype=float)
    d = box.shape[0]
    box = _check_box(box, d)
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    if m >= 2 and (m & (m - 1)) == 0:
        u = sampler.random_base2(int(math.log2(m)))
    else:
        u = sampler.random(m)
    return box[:, 0] + u * (box[:, 1] - box[:, 0])


@dataclass(frozen=True)
class GreedyResult:
    design: Design
    criterion_path: np.ndarray  # criterion value after each added point


class _GreedyState:
    """Sequentially conditioned variances/covariances over candidates and grid."""

    def __init__(self, cands, grid_pts, prior, boundaries):
        self.cands = cands
        self.prior = prior
        self.boundaries = boundaries
        self.V_c = _var0(cands, prior, boundaries)
        self.V_g = _var0(grid_pts, prior, boundaries)
        self.C = _cov0(cands, grid_pts, prior, boundaries)  # (P, M), updated in place
        self.Wc: list[np.ndarray] = []  # per pick: covariance/sqrt(var) over candidates

    def add(self, j: int) -> None:
        vj = self.V_c[j]
        base_col = _cov0(self.cands, self.cands[j : j + 1], self.prior, self.boundaries)[:, 0]
        for w in self.Wc:
            base_col = base_col - w * w[j]
        w_c = base_col / math.sqrt(vj)
        w_g = self.C[j, :] / math.sqrt(vj)
        self.V_c = self.V_c - w_c * w_c
        self.V_g = self.V_g - w_g * w_g
        self.C -= np.outer(w_c, w_g)
        self.Wc.append(w_c)

    def scores(self, banned: np.ndarray, floor: float) -> np.ndarray:
        ok = (self.V_c > floor) & ~banned
        s = np.full(self.V_c.shape, -math.inf)
        if np.any(ok):
            s[ok] = np.sum(self.C[ok] * self.C[ok], axis=1) / self.V_c[ok]
        return s


def greedy_v_optimal(
    n: int,
    grid: CriterionGrid,
    prior: PriorSpec,
    boundaries: Optional[BoundaryConfig],
    candidate_pool=None,
    pool_size: int = GREEDY_POOL_DEFAULT,
    seed: int = 0,
    refine_sweeps: int = 0,
    jitter: float = JITTER_DEFAULT,
) -> GreedyResult:
    """Pick n points greedily to minimize total posterior variance on the grid.

    Each step adds the candidate whose single-point conditioning removes the
    most summed variance from the grid (ties take the lowest candidate
    index). Candidates come from `candidate_pool` or, by default, from a
    scrambled low-discrepancy pool of `pool_size` points over the grid box,
    seeded for reproducibility. Holds a candidates-by-grid covariance in
    memory (O(pool * grid) doubles).

    With refine_sweeps > 0, each sweep revisits every chosen point, removes
    it and greedily re-adds the best replacement, keeping the result only if
    the criterion improves. Variance-only throughout: no simulator calls.
    """
    _validate_config(prior, boundaries)
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    if grid.points.shape[1] != prior.dim:
        raise ShapeError(
            f"grid dimension {grid.points.shape[1]} does not match prior dimension {prior.dim}"
        )
    if candidate_pool is None:
        cands = sobol_pool(pool_size, grid.box, seed)
    else:
        cands = np.asarray(candidate_pool, dtype=float)
        if cands.ndim != 2 or cands.shape[1] != prior.dim:
            raise ShapeError(f"candidate pool must be (m, {prior.dim}), got {cands.shape}")
    if cands.shape[0] < n:
        raise InvalidParameterError(
            f"candidate pool has {cands.shape[0]} points, fewer than n = {n}"
        )
    floor = GREEDY_VAR_FLOOR * prior.sigma2

    def run_greedy(fixed: list[int], count: int) -> tuple[list[int], list[float]]:
        state = _GreedyState(cands, grid.points, prior, boundaries)
        banned = np.zeros(cands.shape[0], dtype=bool)
        path = []
        for j in fixed:
            state.add(j)
            banned[j] = True
            path.append(float(np.sum(state.V_g)))
        chosen = list(fixed)
        for _ in range(count):
            s = state.scores(banned, floor)
            j = int(np.argmax(s))
            if not math.isfinite(s[j]):
                raise UsageError(
                    "no selectable candidates left (all on boundaries or duplicates)"
                )
            state.add(j)
            banned[j] = True
            chosen.append(j)
            path.append(float(np.sum(state.V_g)))
        return chosen, path

    chosen, path = run_greedy([], n)

    for _ in range(int(refine_sweeps)):
        improved = False
        for pos in range(n):
            kept = chosen[:pos] + chosen[pos + 1 :]
            trial, trial_path = run_greedy(kept, 1)
            if trial_path[-1] < path[-1] - 1e-12 * prior.sigma2:
                chosen, path = trial, trial_path
                improved = True
        if not improved:
            break

    design = Design(
        points=cands[chosen],
        box=grid.box,
        seed=seed,
        provenance="greedy-vopt",
    )
    return GreedyResult(design=design, criterion_path=np.asarray(path))
