"""Exception hierarchy.

``UsageError`` subclasses map to CLI exit code 2, ``AlgorithmError``
subclasses to exit code 3.
"""


class ImbrError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 3


class UsageError(ImbrError):
    exit_code = 2


class AlgorithmError(ImbrError):
    exit_code = 3


class FormatError(UsageError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(UsageError):
    pass


class EmptyVocabulary(AlgorithmError):
    pass


class InsufficientNeighbors(AlgorithmError):
    def __init__(self, query, eligible, k):
        self.query, self.eligible, self.k = query, eligible, k
        super().__init__(f"query {query} has {eligible} eligible candidates, need k={k}")


class ClassTooSmall(AlgorithmError):
    pass


class NoMajorityAvailable(AlgorithmError):
    pass


class ClassIsMajority(AlgorithmError):
    pass


class UnknownClass(UsageError):
    pass


class EmptyClass(AlgorithmError):
    pass


class NonFiniteLoss(AlgorithmError):
    pass


class DimensionMismatch(UsageError):
    pass


class NegativeFeature(UsageError):
    pass


class TooFewRows(UsageError):
    pass


class LengthMismatch(UsageError):
    pass


class ClassOutOfRange(UsageError):
    pass


class TotalTooSmall(UsageError):
    pass
