"""Exception hierarchy shared by the numerical modules and the CLI."""
from typing import Any, Dict, Optional


class CellcapError(Exception):
    """Base class for every error raised by cellcap."""


class DomainError(CellcapError, ValueError):
    """An argument lies outside the domain of the operation."""


class GammaOverflowError(CellcapError, OverflowError):
    """Gamma function result is not representable as a float."""


class DimensionError(CellcapError, ValueError):
    """Empty or mismatched array arguments."""


class EmptySampleError(CellcapError, ValueError):
    """Too few samples for a goodness-of-fit statistic."""


class UnsupportedMeijerGError(CellcapError):
    """Meijer-G parameter set outside the supported instances."""


class NonConvergenceError(CellcapError, ArithmeticError):
    """A numerical scheme exhausted its budget without meeting its tolerance."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.details = dict(details or {})
        if self.details:
            extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.details.items()))
            message = f"{message} ({extra})"
        super().__init__(message)


class SweepError(CellcapError):
    """Failure while evaluating one point of a parameter sweep."""

    def __init__(self, parameter: str, value: Any, cause: Exception):
        self.parameter = parameter
        self.value = value
        self.cause = cause
        super().__init__(f"{parameter}={value!r}: {cause}")


class ConfigError(CellcapError):
    """Invalid run configuration."""


class ValidationFailure(CellcapError):
    """One or more oracle checks failed."""
