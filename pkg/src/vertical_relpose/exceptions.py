"""
Custom exceptions for vertical-relpose.

Provides specific exception types for different error scenarios.
"""

from typing import Optional


class VerticalRelposeError(Exception):
    """Base exception for all vertical-relpose errors."""
    pass


class InvalidInputError(VerticalRelposeError, ValueError):
    """Raised when an argument violates an operation's precondition."""
    pass


class InvalidCalibrationError(InvalidInputError):
    """Raised when a calibration matrix is singular or malformed."""
    pass


class DegenerateConfigurationError(VerticalRelposeError):
    """
    Raised when the correspondences do not define a solvable system.

    Attributes:
        rank: Rank reached by the elimination, when known
    """

    def __init__(self, message: str, rank: Optional[int] = None):
        super().__init__(message)
        self.rank = rank


class NonGenericPositionError(DegenerateConfigurationError):
    """
    Raised when Tx and Ty cannot be written over Tz and t, as when a real
    solution has Tz = 0. The determinant route still solves such instances.
    """
    pass


class TemplateMismatchError(VerticalRelposeError):
    """Raised when an instance does not fit the elimination template."""
    pass


class CorrespondenceFileError(VerticalRelposeError):
    """
    Raised when a correspondence file cannot be parsed or validated.

    Attributes:
        path: File being read
        line: 1-based line number of the offending entry, if known
        field: Name of the offending field, if known
    """

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.path = path
        self.line = line
        self.field = field


class SelfTestError(VerticalRelposeError):
    """Raised when a structural fact of the solver does not hold."""
    pass


class RenderError(VerticalRelposeError):
    """Raised when a report template is missing or fails to render."""
    pass
