"""Exception hierarchy.

Every error raised deliberately by the package derives from ``SpdcError`` so
callers (and the CLI) can map them onto exit codes.
"""


class SpdcError(Exception):
    """Base class for all package errors."""


class ValidationError(SpdcError, ValueError):
    """An input violates a documented invariant."""


class RangeError(ValidationError):
    """A wavelength lies outside a crystal's tabulated range."""


class ConfigParseError(ValidationError):
    """A config file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(SpdcError, ArithmeticError):
    """Base class for numerical failures."""


class DomainError(NumericalError):
    """Evanescent input: a longitudinal wave number would be imaginary."""


class PhaseMatchingError(NumericalError):
    """No cut angle phase-matches the configuration."""


class ConditioningError(NumericalError):
    """A matrix is indefinite or too ill-conditioned to trust."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class LimitConvergenceError(NumericalError):
    """An extreme-value stand-in for a limit did not converge."""


class WindowError(NumericalError):
    """A quadrature window clips the integrand."""
