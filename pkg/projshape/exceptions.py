"""
Error hierarchy for projshape.

Every library failure derives from ProjShapeError and carries a stable
``exit_code`` used by the command line. Invalid arguments raise plain
ValueError (exit code 2).
"""

from typing import Any, Dict, Type


class ProjShapeError(Exception):
    """Base class for analysis failures."""

    exit_code: int = 1

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context


class DegenerateFrame(ProjShapeError):
    """Frame points are not in general position."""

    exit_code = 10


class PointAtInfinity(ProjShapeError):
    """Registered point has a vanishing last coordinate."""

    exit_code = 11


class NotConcentrated(ProjShapeError):
    """Axial data cannot be sign-aligned into a common half-space."""

    exit_code = 12


class MeanNotUnique(ProjShapeError):
    """Top eigenvalue of a moment matrix is not simple."""

    exit_code = 13


class UndefinedMeanDirection(ProjShapeError):
    """Resultant vector is (numerically) zero."""

    exit_code = 14


class SingularCovariance(ProjShapeError):
    """Covariance matrix of a test statistic is not invertible."""

    exit_code = 15


class InsufficientData(ProjShapeError):
    """Too few observations for the requested statistic."""

    exit_code = 16


class BootstrapUnstable(ProjShapeError):
    """More than half of the bootstrap resamples were degenerate."""

    exit_code = 17


class AmbiguousAxisNearPi(ProjShapeError):
    """Rotation angle is within tolerance of pi."""

    exit_code = 18


class AtInfinity(ProjShapeError):
    """H-map image has a vanishing first coordinate."""

    exit_code = 19


class DatasetParseError(ProjShapeError):
    """Dataset file does not follow the landmark schema."""

    exit_code = 20


class DatasetValidationError(ProjShapeError):
    """Dataset parses but is internally inconsistent."""

    exit_code = 21


ARGUMENT_ERROR_EXIT_CODE = 2
IO_ERROR_EXIT_CODE = 3


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ProjShapeError):
        return exc.exit_code
    if isinstance(exc, ValueError):
        return ARGUMENT_ERROR_EXIT_CODE
    if isinstance(exc, OSError):
        return IO_ERROR_EXIT_CODE
    return 1


def documented_exit_codes() -> Dict[str, int]:
    """Stable mapping from error class name to exit code."""
    codes: Dict[str, int] = {"ValueError": ARGUMENT_ERROR_EXIT_CODE, "OSError": IO_ERROR_EXIT_CODE}
    stack: list[Type[ProjShapeError]] = list(ProjShapeError.__subclasses__())
    while stack:
        cls = stack.pop()
        codes[cls.__name__] = cls.exit_code
        stack.extend(cls.__subclasses__())
    return dict(sorted(codes.items(), key=lambda item: item[1]))
