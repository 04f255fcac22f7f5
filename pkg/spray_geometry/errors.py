"""Exception hierarchy for spray_geometry."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from spray_geometry.flows import Trajectory


class SprayGeometryError(Exception):
    """Root of every error raised by the package."""


class ConfigError(SprayGeometryError, ValueError):
    """An environment or definition setting has an unusable value."""


class ProblemError(SprayGeometryError, ValueError):
    """A problem definition failed validation."""


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

class ExpressionError(SprayGeometryError, ValueError):
    """Raised while reading an expression."""

    def __init__(self, message: str, text: str | None = None, offset: int | None = None):
        self.text = text
        self.offset = offset
        super().__init__(message)

    def __str__(self) -> str:
        message = super().__str__()
        if self.offset is None:
            return message
        return f"{message} (at byte {self.offset})"

    def caret(self) -> str:
        """Two-line rendering of the source with a caret under the offending byte."""
        if self.text is None or self.offset is None:
            return ""
        return f"  {self.text}\n  {' ' * self.offset}^"


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownIdentifierError(ExpressionError):
    pass


class IndexOutOfRangeError(ExpressionError):
    pass


class DomainError(SprayGeometryError, ArithmeticError):
    """Evaluation left the domain of an expression.

    ``subexpression`` is the printed node that failed; ``partial`` names the
    derivative (as a tuple of coordinate slots) when the failure happened
    inside a jet.
    """

    def __init__(
        self,
        message: str,
        subexpression: str | None = None,
        partial: tuple[int, ...] | None = None,
    ):
        self.subexpression = subexpression
        self.partial = partial
        super().__init__(message)

    def __str__(self) -> str:
        message = super().__str__()
        if self.subexpression is not None:
            message = f"{message} in '{self.subexpression}'"
        if self.partial:
            message = f"{message} (partial {self.partial})"
        return message


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

class GeometryError(SprayGeometryError):
    pass


class DimensionMismatchError(GeometryError, ValueError):
    pass


class SingularMetricError(GeometryError):
    def __init__(self, message: str, determinant: float | None = None):
        self.determinant = determinant
        super().__init__(message)


class DegenerateLagrangianError(SingularMetricError):
    pass


# ---------------------------------------------------------------------------
# Flows
# ---------------------------------------------------------------------------

class FlowError(SprayGeometryError):
    pass


class IntegrationError(FlowError):
    """Integration stopped early; ``last_time`` is the last valid sample time.

    ``trajectory`` holds the accepted samples when the orbit itself failed.
    """

    def __init__(self, message: str, last_time: float, trajectory: Trajectory | None = None):
        self.last_time = last_time
        self.trajectory = trajectory
        super().__init__(message)


class BlowUpError(IntegrationError):
    """The blow-up guard fired; ``trajectory`` holds the samples computed so far."""

    def __init__(self, message: str, last_time: float, trajectory: Trajectory, reason: str):
        self.reason = reason
        super().__init__(message, last_time, trajectory)
