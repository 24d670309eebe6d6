"""
Errors - Exception hierarchy for the lab.

Library code raises these; only the experiment runner turns them into
process exit codes, through the ``exit_code`` carried by each class.
"""

from typing import Optional

from .settings import EXIT_ACCEPTANCE, EXIT_NUMERICAL, EXIT_VALIDATION


class LabError(Exception):
    """Base class of every error raised by the lab."""
    exit_code: int = EXIT_NUMERICAL


class ValidationError(LabError, ValueError):
    """A parameter or configuration value violates its invariant."""
    exit_code = EXIT_VALIDATION


class ConfigParseError(ValidationError):
    """A config document line could not be parsed."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ConfigValidationError(ValidationError):
    """A parsed config is missing a field or holds an invalid value."""


class NumericalError(LabError):
    """A numerical procedure failed to produce a trustworthy value."""
    exit_code = EXIT_NUMERICAL


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""


class InfeasibleStateError(NumericalError):
    """Order parameters whose covariance is not positive semidefinite."""

    def __init__(self, message: str, t: Optional[float] = None):
        if t is not None:
            message = f"{message} (at t={t:.6g})"
        super().__init__(message)
        self.t = t


class LengthCollapseError(NumericalError):
    """A machine length shrank below the guard value."""

    def __init__(self, message: str, t: Optional[float] = None):
        if t is not None:
            message = f"{message} (at t={t:.6g})"
        super().__init__(message)
        self.t = t


class AcceptanceError(LabError):
    """A check finished but some value fell outside its acceptance band."""
    exit_code = EXIT_ACCEPTANCE
