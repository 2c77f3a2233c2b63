"""Exception hierarchy.

Validation failures (bad arguments, malformed files) map to CLI exit
code 1; operating-system I/O failures map to exit code 2.
"""


class ConformalError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(ConformalError):
    """Input violates a documented precondition or format rule."""


class MissingLabelsError(ValidationError):
    """Operation needs true labels but the score matrix has none."""


class InvalidRowError(ValidationError):
    """A probability row is off the simplex or otherwise malformed."""


class EmptyCalibrationError(ValidationError):
    pass


class TooFewRowsError(ValidationError):
    pass


class FederationEmptyError(ValidationError):
    pass


class LengthMismatchError(ValidationError):
    pass


class EmptyInputError(ValidationError):
    pass


class InvalidSpecError(ValidationError):
    pass


class ParseError(ValidationError):
    """Malformed score-matrix or manifest file; message carries the location."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SimplexViolationError(ParseError):
    """Row probabilities do not form a distribution within tolerance."""


class LabelOutOfRangeError(ParseError):
    """Label is not an integer in [0, C-1] (or the -1 unlabeled sentinel)."""
