"""Gaussian product correlation kernel and the pieces boundary updates need.

All correlation functions here are stationary and separable across input
dimensions. The one-dimensional family is

    r(delta) = exp(-(delta / theta)**2),

with a correlation length theta per dimension. Boundary conditioning only
ever needs three derived quantities along the boundary axis: the updated
correlation component R1, its ratio form for a pair of parallel boundaries,
and the cumulative "warp" integral of the resolved-variance profile 1 - r**2.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import erf

from .errors import DegenerateBoundaryError, DomainError, InvalidParameterError, ShapeError

# Below this, 1 - r^2(c) is treated as zero and a parallel pair is degenerate.
DEGENERACY_FLOOR = 1e-14


class KernelFamily(enum.Enum):
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class KernelSpec:
    """Separable Gaussian correlation kernel with one length scale per axis.

    Parameters
    ----------
    thetas : sequence of float
        Correlation lengths, one per input dimension. All must be positive
        and finite.
    family : KernelFamily
        Kernel family tag. Only GAUSSIAN is defined; the tag exists so that
        serialized configurations stay self-describing.
    """

    thetas: tuple[float, ...]
    family: KernelFamily = KernelFamily.GAUSSIAN

    def __post_init__(self):
        if not isinstance(self.family, KernelFamily):
            raise InvalidParameterError(f"unknown kernel family: {self.family!r}")
        thetas = tuple(float(t) for t in np.atleast_1d(np.asarray(self.thetas, dtype=float)))
        if len(thetas) == 0:
            raise InvalidParameterError("kernel needs at least one correlation length")
        for i, t in enumerate(thetas):
            if not math.isfinite(t) or t <= 0.0:
                raise InvalidParameterError(f"theta[{i}] must be positive and finite, got {t}")
        object.__setattr__(self, "thetas", thetas)

    @property
    def dim(self) -> int:
        return len(self.thetas)

    def theta(self, axis: int) -> float:
        if not 0 <= axis < len(self.thetas):
            raise InvalidParameterError(
                f"axis {axis} out of range for a {len(self.thetas)}-dimensional kernel"
            )
        return self.thetas[axis]

    @classmethod
    def isotropic(cls, theta: float, dim: int) -> "KernelSpec":
        return cls(thetas=(float(theta),) * int(dim))


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta) or theta <= 0.0:
        raise InvalidParameterError(f"theta must be positive and finite, got {theta}")
    return theta


def corr_1d(delta, theta: float):
    """One-dimensional Gaussian correlation r(delta) = exp(-(delta/theta)^2).

    `delta` may be a scalar or an ndarray; the result matches its shape.
    The value lies in (0, 1] and equals 1 exactly at delta = 0.
    """
    theta = _check_theta(theta)
    delta = np.asarray(delta, dtype=float)
    out = np.exp(-np.square(delta / theta))
    return float(out) if out.ndim == 0 else out


def corr_product(x, x2, kernel: KernelSpec):
    """Product correlation between two points under a separable kernel.

    Both points must be 1-d arrays of length kernel.dim. Returns a float.
    """
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.ndim != 1 or x2.ndim != 1:
        raise ShapeError(f"corr_product expects 1-d points, got shapes {x.shape} and {x2.shape}")
    if x.shape[0] != kernel.dim or x2.shape[0] != kernel.dim:
        raise ShapeError(
            f"point dimensions {x.shape[0]}, {x2.shape[0]} do not match kernel dim {kernel.dim}"
        )
    thetas = np.asarray(kernel.thetas)
    return float(np.exp(-np.sum(np.square((x - x2) / thetas))))


def updated_corr_component(a, a2, theta: float):
    """Correlation component along the boundary axis after conditioning.

    R1(a, a2) = r(a - a2) - r(a) r(a2) where a, a2 are (signed) offsets from
    the boundary along its axis. This is the conditional covariance of a unit
    variance process at offsets a, a2 given its value at offset 0, so it is a
    positive semidefinite kernel in its own right; it vanishes whenever
    either argument is 0.
    """
    theta = _check_theta(theta)
    a = np.asarray(a, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    out = corr_1d(a - a2, theta) - corr_1d(a, theta) * corr_1d(a2, theta)
    arr = np.asarray(out)
    return float(arr) if arr.ndim == 0 else arr


def ratio_corr_component(a, c, theta: float):
    """R1(a, c) / R1(c, c): the weight a second parallel boundary contributes.

    `c` is the separation between the two parallel boundaries. Raises
    DegenerateBoundaryError when 1 - r(c)^2 falls below the degeneracy
    floor, i.e. the two boundaries are numerically indistinguishable.
    """
    theta = _check_theta(theta)
    c = float(c)
    rc = corr_1d(c, theta)
    denom = 1.0 - rc * rc
    if denom < DEGENERACY_FLOOR:
        raise DegenerateBoundaryError(
            f"parallel boundaries with separation {c} and theta {theta} are degenerate: "
            f"1 - r^2(c) = {denom:.3e} < {DEGENERACY_FLOOR:.0e}"
        )
    out = updated_corr_component(a, c, theta) / denom
    arr = np.asarray(out)
    return float(arr) if arr.ndim == 0 else arr


def warp_integral(a, theta: float):
    """Cumulative resolved-variance integral W(a) = int_0^a (1 - r(t)^2) dt.

    Closed form for the Gaussian kernel:

        W(a) = a - theta * sqrt(pi/8) * erf(sqrt(2) a / theta).

    W is odd in `a`; the public contract restricts to a >= 0 (distances from
    the boundary) and raises DomainError for negative input. W is strictly
    increasing with W(0) = 0 and slope 1 - r(a)^2 < 1 approaching 1 for
    a >> theta.
    """
    theta = _check_theta(theta)
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr < 0.0):
        raise DomainError("warp_integral is defined for nonnegative distances only")
    out = _warp_integral_signed(a_arr, theta)
    return float(out) if out.ndim == 0 else out


def _warp_integral_signed(a, theta: float):
    # Odd extension used internally for interior boundaries; no domain check.
    a = np.asarray(a, dtype=float)
    return a - theta * math.sqrt(math.pi / 8.0) * erf(math.sqrt(2.0) * a / theta)


def warp_integral_quad(a: float, theta: float) -> float:
    """W(a) by adaptive Gauss-Kronrod quadrature. Cross-check for warp_integral."""
    theta = _check_theta(theta)
    a = float(a)
    if a < 0.0:
        raise DomainError("warp_integral_quad is defined for nonnegative distances only")
    val, _ = quad(lambda t: 1.0 - math.exp(-2.0 * (t / theta) ** 2), 0.0, a, epsabs=1e-12)
    return val
