"""Randomized case generator for analytic-vs-brute-force equivalence checks.

Each case draws a boundary arrangement, an anisotropy-free prior, a smooth
value function, a training plan, and two query points. Geometry is scaled
with the correlation length (box side = theta * L with L in [2.5, 6]) so
the training Gram matrices stay honestly conditioned across the theta
range; both conditioning routes then run with the same tiny jitter and
must agree to high relative accuracy.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from kbemu.emulator import (
    AxisBoundary,
    PriorSpec,
    SingleBoundary,
    TrainingSet,
    TwoParallelBoundaries,
    TwoPerpendicularBoundaries,
)
from kbemu.kernel import KernelSpec

KIND_CODES = {"single": 1, "perp": 2, "parallel": 3}
ORACLE_JITTER = 1e-15


@dataclass(frozen=True)
class OracleCase:
    kind: str
    case_index: int
    prior: PriorSpec
    boundaries: object
    training: TrainingSet
    queries: np.ndarray  # (2, d)
    f: Callable[[np.ndarray], float]


def smooth_fn(d: int, seed: int, scale: float) -> Callable[[np.ndarray], float]:
    """A single smooth ridge function; scale-aware so slopes stay moderate."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=d)
    b = rng.uniform(0.0, 2.0 * np.pi)
    amp = rng.uniform(0.5, 2.0)

    def f(p):
        return float(amp * np.sin(np.dot(np.asarray(p, dtype=float), w) / scale + b))

    return f


def _lhc(rng: np.random.Generator, n: int, d: int, lo: float, hi: float) -> np.ndarray:
    u = np.empty((n, d))
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return lo + u * (hi - lo)


def make_case(kind: str, case_index: int) -> OracleCase:
    seed = 100000 * KIND_CODES[kind] + case_index
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 4))
    theta = float(rng.uniform(0.2, 2.0))
    side = theta * float(rng.uniform(2.5, 6.0))
    n = int(rng.integers(0, 16))
    beta = float(rng.uniform(-1.0, 1.0))
    sigma2 = float(rng.uniform(0.5, 2.0))
    prior = PriorSpec(beta=beta, sigma2=sigma2, kernel=KernelSpec.isotropic(theta, d))
    f = smooth_fn(d, case_index + 7, side)

    def plane(axis, location):
        return AxisBoundary(axis=axis, location=location, evaluator=f)

    if kind == "single":
        boundaries = SingleBoundary(plane(0, 0.0))
    elif kind == "perp":
        boundaries = TwoPerpendicularBoundaries(plane(0, 0.0), plane(1, 0.0))
    else:
        boundaries = TwoParallelBoundaries(plane(0, 0.0), plane(0, side))

    if n > 0:
        pts = _lhc(rng, n, d, 0.03 * side, 0.97 * side)
        vals = np.array([f(p) for p in pts])
        training = TrainingSet(points=pts, values=vals)
    else:
        training = TrainingSet.empty(d)
    queries = rng.uniform(0.05 * side, 0.95 * side, size=(2, d))
    return OracleCase(
        kind=kind, case_index=case_index, prior=prior, boundaries=boundaries,
        training=training, queries=queries, f=f,
    )


def rel_gap(a: float, b: float) -> float:
    return abs(a - b) / max(1.0, abs(a), abs(b))
