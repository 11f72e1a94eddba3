"""
Domain errors raised by the core modules.

All errors derive from ValueError so callers that only care about invalid
input can catch a single type; the command layer maps them to exit codes.
"""

from typing import Optional


class DomainError(ValueError):
    """An input lies outside the domain of a formula."""


class MissingVelocityError(DomainError):
    """A quantity needs the longitudinal velocity v_z but none was given."""

    def __init__(self, what: str = "this quantity"):
        super().__init__(f"longitudinal velocity required for {what}")


class GridOverflowError(DomainError):
    """The propagated state reached the edge of the numerical grid."""


class PhaseUndefinedError(DomainError):
    """The on-axis amplitude is too small for its phase to be meaningful."""


class NormalizationError(DomainError):
    """A grid field is not normalized to unit probability."""


class IllPosedFitError(DomainError):
    """The dataset cannot determine the fit parameters."""


class DatasetParseError(ValueError):
    """A dataset or config file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
