# src/bethe_forge/errors.py
from __future__ import annotations


class BetheForgeError(Exception):
    """Base class for bethe-forge errors."""
    exit_code = 1


class PoleError(BetheForgeError, ZeroDivisionError):
    """
    Raised when a spectral parameter lands on a declared pole.

    Evaluation at a pole is never allowed to produce a silent inf/nan.
    """
    def __init__(self, label: str, value: complex, message: str | None = None):
        super().__init__(message or f"{label} evaluated at pole {value!r}")
        self.label = label
        self.value = value


class ParameterRangeError(BetheForgeError, ValueError):
    """Catalog parameters, nesting levels, counts or config values out of range."""
    exit_code = 2


class DimensionGuardError(ParameterRangeError):
    """Dense materialization requested above the configured dimension guard."""
    def __init__(self, message: str, dim: int | None = None, limit: int | None = None):
        super().__init__(message)
        self.dim = dim
        self.limit = limit


class ConvergenceError(BetheForgeError):
    """
    Raised when the Bethe equation solver does not converge.

    The iterate trace is kept for diagnostics.
    """
    exit_code = 3

    def __init__(self, message: str, trace=None, residual: float | None = None):
        super().__init__(message)
        self.trace = list(trace or [])
        self.residual = residual


class VerificationFailure(BetheForgeError):
    """A residual report exceeded its tolerance."""
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report
