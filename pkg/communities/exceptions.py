"""Domain errors. Every class is also a ``ValueError``."""
from typing import Optional


class CascadeCommunitiesError(ValueError):
    """Base class for toolkit errors"""


class ParseError(CascadeCommunitiesError):
    """Malformed line or row in an input file"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(CascadeCommunitiesError):
    pass


class IncompleteGroundTruthError(ValidationError):
    pass


class EmptyInputError(CascadeCommunitiesError):
    pass


class UndefinedEstimateError(CascadeCommunitiesError):
    pass


class CalibrationError(CascadeCommunitiesError):
    pass


class OracleUnavailableError(CascadeCommunitiesError):
    """Cascades carry no who-infected-whom record"""


class DegenerateInputError(CascadeCommunitiesError):
    pass


class FitError(CascadeCommunitiesError):
    pass


class MalformedCascadeError(CascadeCommunitiesError):
    pass


class DomainError(CascadeCommunitiesError):
    pass


class GenerationError(CascadeCommunitiesError):
    pass


class UndefinedModularityError(CascadeCommunitiesError):
    pass


class UndefinedMixingError(CascadeCommunitiesError):
    pass


class UndefinedRelativeSizeError(CascadeCommunitiesError):
    pass
