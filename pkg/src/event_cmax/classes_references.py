"""Exception types shared across event-cmax."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path


class ValidationError(ValueError):
    """Exception raised when a model fails validation."""

    def __init__(self, errors: Sequence[str]) -> None:
        """
        Initializes the ValidationError.

        Args:
            errors: A sequence of strings describing the validation errors.
        """
        self.errors: list[str] = list(errors)
        message: str = "; ".join(self.errors) if self.errors else "Unknown validation error."
        super().__init__(message)


class EventFormatError(ValueError):
    """Raised when a dataset text file contains a line that cannot be parsed."""

    def __init__(self, message: str, *, line_number: int, line: str = "", source: Path | str | None = None) -> None:
        self.line_number: int = line_number
        self.line: str = line
        self.source: str = str(source) if source is not None else "<stream>"
        super().__init__(f"{self.source}:{line_number}: {message} (line: {line.strip()!r})")


class TrajectoryRangeError(ValueError):
    """Raised when a pose is requested outside the time span covered by a trajectory."""


class ParameterError(ValueError):
    """Raised when warp parameters describe an invalid geometric configuration."""


class EvaluationBudgetError(RuntimeError):
    """Raised before a grid search that would exceed its evaluation budget."""

    def __init__(self, requested: int, budget: int) -> None:
        self.requested: int = requested
        self.budget: int = budget
        super().__init__(f"Grid search needs {requested} evaluations but the budget is {budget}.")


class SceneGeometryError(ValueError):
    """Raised when a synthetic scene is not visible from the requested camera poses."""


class RasterFormatError(ValueError):
    """Raised when a raw grid file has a missing or corrupt header."""


__all__: list[str] = [
    "EvaluationBudgetError",
    "EventFormatError",
    "ParameterError",
    "RasterFormatError",
    "SceneGeometryError",
    "TrajectoryRangeError",
    "ValidationError",
]
