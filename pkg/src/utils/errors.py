"""
Error Types

One exception hierarchy for the whole laboratory. The CLI maps these onto
exit codes; library code raises them and never swallows them.
"""
from typing import Any, Dict, Optional


class OISDError(Exception):
    """Base class for every error raised by the laboratory."""


class InvalidParameterError(OISDError, ValueError):
    """A precondition on a parameter, geometry or argument was violated."""


class ResourceLimitError(OISDError):
    """A dense cap, series window or quadrature budget was exhausted."""


class WidenKmaxError(ResourceLimitError):
    """The spin coefficient window lost more mass than allowed."""

    def __init__(self, message: str, suggested_kmax: int, deficit: float):
        super().__init__(message)
        self.suggested_kmax = suggested_kmax
        self.deficit = deficit


class IllConditionedError(OISDError):
    """An inverse map is too ill-conditioned to be trusted."""

    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


class CrossCheckError(OISDError):
    """Two independent computations of the same quantity disagree."""

    def __init__(self, message: str, gap: float):
        super().__init__(message)
        self.gap = gap


class StiffnessError(OISDError):
    """The ODE integrator could not make progress."""


class DensityViolationError(OISDError):
    """A matrix required to be a density matrix is not one."""

    def __init__(self, message: str, report: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.report = report or {}


__all__ = [
    "OISDError",
    "InvalidParameterError",
    "ResourceLimitError",
    "WidenKmaxError",
    "IllConditionedError",
    "CrossCheckError",
    "StiffnessError",
    "DensityViolationError",
]
