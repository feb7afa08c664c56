"""Exception types shared across the package."""


class FilmedGANError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(FilmedGANError, ValueError):
    """Tensor shapes are inconsistent with what an operation requires."""


class ValidationError(FilmedGANError, ValueError):
    """An input value violates a documented precondition."""


class NumericError(FilmedGANError, RuntimeError):
    """A computation produced non-finite or otherwise unusable numbers."""


class ConfigurationError(FilmedGANError, RuntimeError):
    """A requested component or option is unavailable or inconsistent."""


class DataLayoutError(FilmedGANError, OSError):
    """An on-disk dataset directory does not match the expected layout."""
