"""Exception types shared across the package."""


class MomentsError(Exception):
    """Base class for all package errors."""


class PoleError(MomentsError, ValueError):
    """Evaluation point sits on (or too close to) a pole."""


class AccuracyError(MomentsError, ArithmeticError):
    """A numerical routine could not reach the requested tolerance.

    The best available estimate is attached as ``value`` and the error
    estimate as ``error``.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class DivisibilityError(MomentsError, ValueError):
    """An arithmetic precondition on divisibility failed."""


class RangeError(MomentsError, ValueError):
    """Argument outside the supported range."""


class MissingPrimeError(MomentsError, KeyError):
    """Coefficient requested at a prime with no local data."""


class ParseError(MomentsError, ValueError):
    """Malformed input file; ``line`` holds the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(MomentsError, ValueError):
    """Input data failed an invariant check."""


class TruncationError(MomentsError, ArithmeticError):
    """A truncated sum has a tail bound larger than the tolerance."""

    def __init__(self, message, tail=None):
        super().__init__(message)
        self.tail = tail


class CalibrationUnavailableError(MomentsError, LookupError):
    """Asymptotic constants have not been fitted for these parameters."""


class CorpusInsufficientError(MomentsError, ValueError):
    """The spectral corpus does not cover the requested range."""


class NetworkError(MomentsError, OSError):
    """Remote data source unreachable after retries."""


class SchemaDriftError(MomentsError, ValueError):
    """Remote data is missing expected fields."""


class NonDecayingInputError(ValidationError):
    """A spectral test function does not decay fast enough to integrate."""
