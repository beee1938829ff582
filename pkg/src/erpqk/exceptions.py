"""Exception hierarchy shared by all modules."""


class ErpqkError(Exception):
    """Base class for library errors."""


class ParameterError(ErpqkError, ValueError):
    """Invalid argument value or shape."""


class DomainError(ErpqkError, ValueError):
    """Input outside the domain of a matrix function (e.g. non-positive eigenvalue)."""


class LengthError(ParameterError):
    """Signal too short for the requested operation."""


class BoundsError(ParameterError):
    """Epoch windows that do not fit inside the recording.

    ``offending`` lists the indices of the events whose window is out of range.
    """

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class FitError(ErpqkError):
    """A model cannot be fitted on the given data (e.g. a missing class)."""


class MetricError(ErpqkError, ValueError):
    """A metric is undefined for the given confusion counts."""


class ResourceError(ErpqkError):
    """Requested computation exceeds a resource guard."""


class LoadError(ErpqkError):
    """A subject directory or data file is missing or malformed."""


class StageError(ErpqkError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause
