"""Exception hierarchy shared by the solver library and the CLI."""

from typing import Any, Optional


class DistBeamError(Exception):
    """Base class for all library errors."""

    exit_code: int = 4

    def __init__(self, message: str, **extra: Any):
        super().__init__(message)
        self.extra = extra

    def to_dict(self) -> dict[str, Any]:
        """Machine-readable error payload."""
        return {
            "error": type(self).__name__,
            "detail": str(self),
            "exit_code": self.exit_code,
            **{k: _jsonable(v) for k, v in self.extra.items()},
        }


class ValidationError(DistBeamError, ValueError):
    """Invalid input data or configuration."""

    exit_code = 2


class DomainError(ValidationError):
    """Argument outside the domain of an operation."""


class PreconditionError(ValidationError):
    """A documented precondition of an operation does not hold."""


class ResolutionError(ValidationError):
    """Grid too coarse for the requested regularization width."""


class UsageError(ValidationError):
    """Malformed command line."""


class ExpressionSyntaxError(ValidationError):
    """Syntax error in a forcing expression."""

    def __init__(self, message: str, position: int, source: str):
        super().__init__(f"{message} at position {position}", position=position, source=source)
        self.position = position
        self.source = source


class SingularParameterError(DistBeamError):
    """The interface system is singular: uniqueness fails for these forces."""

    exit_code = 3

    def __init__(self, det: float, scale: float, threshold: float):
        super().__init__(
            f"interface system singular: |det|/scale = {abs(det) / scale:.3e} <= {threshold:.1e}",
            det=det,
            scale=scale,
            threshold=threshold,
        )
        self.det = det
        self.scale = scale


class NumericalError(DistBeamError):
    """A numerical procedure failed."""

    exit_code = 4


class QuadratureError(NumericalError):
    """Adaptive quadrature did not converge or hit a non-finite integrand."""


class SolverError(NumericalError):
    """A banded linear system could not be solved reliably."""

    def __init__(self, message: str, pivot: Optional[float] = None, index: Optional[int] = None):
        super().__init__(message, pivot=pivot, index=index)
        self.pivot = pivot
        self.index = index


class InconclusiveLimitError(NumericalError):
    """A regularization sequence neither contracts nor grows clearly."""


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, bool)) or value is None:
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)
