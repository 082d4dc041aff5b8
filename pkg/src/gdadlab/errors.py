"""Exception hierarchy shared across the package."""

from __future__ import annotations


class GdadError(Exception):
    """Base class for all errors raised by gdadlab."""


class ConstantOrderingError(GdadError):
    """Declared smoothness/PL constants violate the required ordering."""


class UnsupportedCertificateError(GdadError):
    """A certificate was requested for a side the problem cannot support."""


class InnerMaxDidNotConverge(GdadError):
    """Gradient ascent on the inner maximization hit its iteration cap."""

    def __init__(self, message: str, grad_norm: float):
        super().__init__(message)
        self.grad_norm = grad_norm


class MissingOracleError(GdadError):
    """A Lyapunov value needs an oracle or reference the problem lacks."""

    def __init__(self, field: str, message: str | None = None):
        super().__init__(message or f"problem is missing required field {field!r}")
        self.field = field


class FieldEvaluationError(GdadError):
    """The vector field produced a non-finite value."""

    def __init__(self, message: str, x=None, y=None):
        super().__init__(message)
        self.x = x
        self.y = y


class ScheduleError(GdadError):
    """Step-size schedule cannot be formed from the given constants."""


class DivergenceError(GdadError):
    """Integration left the finite region; carries the partial trajectory."""

    def __init__(self, message: str, trajectory=None, last_state=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.last_state = last_state


class ConfigurationError(GdadError):
    """A check or run was configured inconsistently (regime mismatch etc.)."""


class InsufficientDataError(GdadError):
    """Too few trajectory samples for the requested audit."""
