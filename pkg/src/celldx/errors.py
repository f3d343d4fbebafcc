"""Exception types shared across the toolkit."""


class CelldxError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(CelldxError):
    """Tensor shapes do not compose for the requested operation."""


class ConfigurationError(CelldxError):
    """A model or run configuration is internally inconsistent."""


class ConsistencyError(CelldxError):
    """Paired structures (weights/gradients/state) disagree."""


class LayoutError(CelldxError):
    """A dataset directory does not have the expected layout."""


class DataError(CelldxError):
    """Input data violates a documented precondition."""


class TrainingDivergedError(CelldxError):
    """Training produced a non-finite loss."""


class ParseError(CelldxError):
    """A serialized artifact could not be decoded.

    ``code`` is a stable machine-readable identifier for the failure
    (e.g. ``bad_magic``, ``truncated``) so callers can branch without
    string-matching the human message.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class WeightFormatError(ParseError):
    """Malformed weight file."""


class NpyParseError(ParseError):
    """Malformed NPY file."""


class PcdParseError(ParseError):
    """Malformed PCD file."""
