"""Exception taxonomy shared across the package.

Every failure mode surfaced by the numerical layers maps to one of these,
so the CLI can translate them into distinct exit codes.
"""


class SpinvError(Exception):
    """Base class for all package errors."""


class DomainError(SpinvError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ValidationError(SpinvError, ValueError):
    """Invalid parameter values or malformed configuration."""


class ParseError(SpinvError, ValueError):
    """Malformed input data (CSV and friends)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class QuadratureError(SpinvError):
    """Non-finite integrand evaluation; carries the offending abscissa."""

    def __init__(self, message, abscissa=None):
        if abscissa is not None:
            message = f"{message} (at abscissa {abscissa!r})"
        super().__init__(message)
        self.abscissa = abscissa


class InversionError(SpinvError):
    """Fourier inversion produced an unusable value (p-bar <= 0, non-finite CF)."""


class ConvergenceError(SpinvError):
    """Iterative solver exhausted its budget; carries the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnattainableMeanError(ConvergenceError):
    """Saddlepoint equation has no solution: x0 outside the range of K'."""
