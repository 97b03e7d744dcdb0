"""Validation of a built emulator against held-out simulator runs.

The central quantity is the standardized error S(x) = (E[f(x)] - f(x)) / sd(x):
under the emulator's own second-order description S should be small, and
|S| > 3 at many held-out points signals a conflict between emulator and
simulator. Points the emulator claims to know exactly (zero variance, e.g.
on a known boundary) are flagged and excluded from S statistics; a zero
variance with a visibly nonzero error is reported as an inconsistency, not
a statistic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .emulator import AdjustedEmulator, _as_points
from .errors import EmulatorInconsistencyError, InvalidParameterError, ShapeError

SD_EXACT_TOL = 1e-12   # below this, the emulator is asserting exact knowledge
RESID_EXACT_TOL = 1e-9  # exact knowledge must be this accurate
LARGE_S = 3.0


@dataclass(frozen=True)
class DiagnosticReport:
    """Per-point emulator-vs-simulator comparison plus summary statistics."""

    points: np.ndarray
    truth: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    s: np.ndarray          # standardized errors; 0 at exact-knowledge points
    exact: np.ndarray      # True where the emulator claims (verified) exactness

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def rmse(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.mean - self.truth))))

    @property
    def max_abs_s(self) -> float:
        live = ~self.exact
        return float(np.max(np.abs(self.s[live]))) if np.any(live) else 0.0

    @property
    def n_large(self) -> int:
        return int(np.sum(np.abs(self.s[~self.exact]) > LARGE_S))

    @property
    def frac_large(self) -> float:
        live = int(np.sum(~self.exact))
        return self.n_large / live if live else 0.0

    def to_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "truth": self.truth.tolist(),
            "mean": self.mean.tolist(),
            "sd": self.sd.tolist(),
            "s": self.s.tolist(),
            "exact": self.exact.astype(int).tolist(),
            "summary": {
                "n_points": self.n_points,
                "rmse": self.rmse,
                "max_abs_s": self.max_abs_s,
                "frac_large": self.frac_large,
            },
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def save_csv(self, path, header_lines: tuple[str, ...] = ()) -> None:
        d = self.points.shape[1]
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            cols = [f"x{j}" for j in range(d)] + ["truth", "mean", "sd", "s", "exact"]
            fh.write(",".join(cols) + "\n")
            for i in range(self.n_points):
                vals = [f"{v:.17g}" for v in self.points[i]]
                vals += [
                    f"{self.truth[i]:.17g}",
                    f"{self.mean[i]:.17g}",
                    f"{self.sd[i]:.17g}",
                    f"{self.s[i]:.17g}",
                    str(int(self.exact[i])),
                ]
                fh.write(",".join(vals) + "\n")


def standardized_errors(em: AdjustedEmulator, points, true_values) -> DiagnosticReport:
    """Compare emulator predictions with simulator truth at held-out points."""
    X, _ = _as_points(points, em.prior.dim)
    if X.shape[0] == 0:
        raise InvalidParameterError("diagnostic point set is empty")
    truth = np.asarray(true_values, dtype=float).ravel()
    if truth.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} points but {truth.shape[0]} true values")
    if not np.all(np.isfinite(truth)):
        raise InvalidParameterError("true values must be finite")
    mean = np.atleast_1d(em.mean(X))
    sd = np.sqrt(np.atleast_1d(em.var(X)))
    resid = mean - truth
    exact = sd < SD_EXACT_TOL
    bad = exact & (np.abs(resid) >= RESID_EXACT_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise EmulatorInconsistencyError(
            f"emulator claims exact knowledge at {X[i].tolist()} "
            f"(sd = {sd[i]:.3e}) but the error there is {resid[i]:.3e}"
        )
    s = np.zeros_like(resid)
    live = ~exact
    s[live] = resid[live] / sd[live]
    return DiagnosticReport(points=X, truth=truth, mean=mean, sd=sd, s=s, exact=exact)


def rmse(em: AdjustedEmulator, points, true_values) -> float:
    """Root mean square prediction error at held-out points."""
    X, _ = _as_points(points, em.prior.dim)
    if X.shape[0] == 0:
        raise InvalidParameterError("diagnostic point set is empty")
    truth = np.asarray(true_values, dtype=float).ravel()
    if truth.shape[0] != X.shape[0]:
        raise ShapeError(f"{X.shape[0]} points but {truth.shape[0]} true values")
    mean = np.atleast_1d(em.mean(X))
    return float(np.sqrt(np.mean(np.square(mean - truth))))


@dataclass(frozen=True)
class SliceSpec:
    """A 2-d slice through the input box for surface sweeps.

    axes : the two input axes that vary; resolution : grid points per axis;
    base : full-dimensional point supplying the held coordinates;
    box : (d, 2) low/high; truth : optional simulator for S values.
    """

    axes: tuple[int, int]
    resolution: tuple[int, int]
    base: np.ndarray
    box: np.ndarray
    truth: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        box = np.asarray(self.box, dtype=float)
        i, j = self.axes
        if i == j:
            raise InvalidParameterError("slice axes must be distinct")
        d = base.shape[0]
        if not (0 <= i < d and 0 <= j < d):
            raise ShapeError(f"slice axes {self.axes} out of range for dimension {d}")
        if box.shape != (d, 2):
            raise ShapeError(f"box must have shape ({d}, 2), got {box.shape}")
        ri, rj = self.resolution
        if ri < 2 or rj < 2:
            raise InvalidParameterError(f"slice resolution must be >= 2, got {self.resolution}")
        object.__setattr__(self, "axes", (int(i), int(j)))
        object.__setattr__(self, "resolution", (int(ri), int(rj)))
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "box", box)


@dataclass(frozen=True)
class SweepResult:
    """Mean/sd (and optionally truth and S) over a 2-d slice, in row-major order."""

    slice_spec: SliceSpec
    points: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    truth: Optional[np.ndarray] = None
    s: Optional[np.ndarray] = None

    def save_csv(self, path, header_lines: tuple[str, ...] = ()) -> None:
        i, j = self.slice_spec.axes
        with open(path, "w") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            cols = [f"x{i}", f"x{j}", "mean", "sd"]
            if self.truth is not None:
                cols += ["truth", "s"]
            fh.write(",".join(cols) + "\n")
            for k in range(self.points.shape[0]):
                vals = [
                    f"{self.points[k, i]:.17g}",
                    f"{self.points[k, j]:.17g}",
                    f"{self.mean[k]:.17g}",
                    f"{self.sd[k]:.17g}",
                ]
                if self.truth is not None:
                    vals += [f"{self.truth[k]:.17g}", f"{self.s[k]:.17g}"]
                fh.write(",".join(vals) + "\n")


def grid_sweep(em: AdjustedEmulator, slice_spec: SliceSpec) -> SweepResult:
    """Evaluate the emulator over a 2-d slice of the input box."""
    i, j = slice_spec.axes
    ri, rj = slice_spec.resolution
    gi = np.linspace(slice_spec.box[i, 0], slice_spec.box[i, 1], ri)
    gj = np.linspace(slice_spec.box[j, 0], slice_spec.box[j, 1], rj)
    GI, GJ = np.meshgrid(gi, gj, indexing="ij")
    pts = np.tile(slice_spec.base, (ri * rj, 1))
    pts[:, i] = GI.ravel()
    pts[:, j] = GJ.ravel()
    mean = np.atleast_1d(em.mean(pts))
    sd = np.sqrt(np.atleast_1d(em.var(pts)))
    truth_vals = None
    s = None
    if slice_spec.truth is not None:
        truth_vals = np.array([float(slice_spec.truth(p)) for p in pts])
        resid = mean - truth_vals
        exact = sd < SD_EXACT_TOL
        bad = exact & (np.abs(resid) >= RESID_EXACT_TOL)
        if np.any(bad):
            k = int(np.argmax(bad))
            raise EmulatorInconsistencyError(
                f"emulator claims exact knowledge at {pts[k].tolist()} "
                f"but the error there is {resid[k]:.3e}"
            )
        s = np.zeros_like(resid)
        s[~exact] = resid[~exact] / sd[~exact]
    return SweepResult(slice_spec=slice_spec, points=pts, mean=mean, sd=sd,
                       truth=truth_vals, s=s)


def summary_row(config: str, n_train: int, boundaries: str, report: DiagnosticReport) -> str:
    """One fixed-format summary table row."""
    return (
        f"{config:<24} {n_train:>7d} {boundaries:<10} "
        f"{report.rmse:>12.6e} {report.max_abs_s:>8.3f} {report.frac_large:>10.4f}"
    )


def summary_header() -> str:
    return (
        f"{'config':<24} {'n_train':>7} {'boundaries':<10} "
        f"{'rmse':>12} {'max|S|':>8} {'frac|S|>3':>10}"
    )


def format_summary_table(rows: list[tuple[str, int, str, DiagnosticReport]]) -> str:
    lines = [summary_header()]
    lines += [summary_row(*row) for row in rows]
    return "\n".join(lines)
