"""Exception hierarchy shared across the package."""


class FatigueNetError(Exception):
    """Base class for every error this package raises on purpose."""


class ShapeError(FatigueNetError, ValueError):
    """A tensor had the wrong shape or an impossible extent."""


class StateError(FatigueNetError, RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""


class InvalidLabelError(FatigueNetError, ValueError):
    """A label outside {0, 1} reached a binary operation."""


class DegenerateDataError(FatigueNetError, ValueError):
    """A dataset is unusable: empty class, single-class training set, etc."""


class DecodeError(FatigueNetError, ValueError):
    """An image file could not be decoded. The message names the source."""


class ConfigError(FatigueNetError, ValueError):
    """A run configuration value is out of range."""


class ModelFormatError(FatigueNetError, ValueError):
    """Base class for frozen-model file problems."""


class MagicError(ModelFormatError):
    """The file does not start with the frozen-model magic bytes."""


class VersionError(ModelFormatError):
    """The file declares a format version this reader does not support."""


class ChecksumError(ModelFormatError):
    """The trailing CRC-32 does not match the file contents."""


class TruncatedError(ModelFormatError):
    """The file ended before the declared structure was complete."""


class PayloadShapeError(ModelFormatError):
    """Declared tensor extents are inconsistent with the stored payload."""
