"""
Error types shared across the pipeline.
InputError subclasses map to exit status 2, everything else to exit status 1.
"""


class TextureMapError(Exception):
    """Base class for all pipeline errors."""

    exit_status = 1


class InputError(TextureMapError, ValueError):
    """Bad user input or a violated precondition."""

    exit_status = 2


class ImageReadError(InputError):
    """Image file missing or unreadable."""


class UnsupportedFormatError(InputError):
    """Image decodes to a format or pixel layout we do not handle."""


class CorruptImageError(InputError):
    """Image header is valid but the pixel data is damaged or truncated."""


class ConfigError(InputError):
    """Run configuration out of range or unparseable."""


class ConfigMismatchError(InputError):
    """Prediction config disagrees with the metadata stored in a model."""


class TableError(InputError):
    """Malformed, empty or unlabeled feature table, or a bad class map."""


class ModelFormatError(InputError):
    """Model file with an unknown header, version or a malformed body."""


class ComputationError(TextureMapError):
    """Numeric failure inside a pipeline stage."""
