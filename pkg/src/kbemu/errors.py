"""Exception types raised across the package.

Every error kbemu raises on purpose derives from KbemuError, so callers can
catch one base class. Input-validation errors also derive from ValueError
to stay friendly to generic callers.
"""


class KbemuError(Exception):
    """Base class for all kbemu errors."""


class InvalidParameterError(KbemuError, ValueError):
    """A numeric parameter is out of range, nonfinite, or otherwise invalid."""


class ShapeError(KbemuError, ValueError):
    """An array argument has the wrong shape or an inconsistent dimension."""


class DomainError(KbemuError, ValueError):
    """A point lies outside the region where the requested quantity is defined."""


class DegenerateBoundaryError(KbemuError, ValueError):
    """A boundary arrangement is numerically degenerate (e.g. parallel pair too close)."""


class UsageError(KbemuError):
    """An operation was called in a state or with arguments it does not support."""


class ConditioningError(KbemuError):
    """A covariance matrix stayed non positive definite after jitter escalation."""

    def __init__(self, message: str, pivot: int | None = None, jitter: float | None = None):
        super().__init__(message)
        self.pivot = pivot
        self.jitter = jitter


class NumericalConsistencyError(KbemuError):
    """An internally computed quantity violated a known bound by more than roundoff."""


class StiffnessError(KbemuError):
    """The explicit ODE solver failed to advance; the system is too stiff for it."""


class ModelEvaluationError(KbemuError):
    """A built-in model produced a nonfinite or otherwise unusable value."""


class EmulatorInconsistencyError(KbemuError):
    """A diagnostic found the emulator internally inconsistent (zero variance, nonzero error)."""


class ConfigError(KbemuError, ValueError):
    """A run or emulator configuration file is malformed or self-contradictory."""
