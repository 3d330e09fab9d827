# -*- coding: utf-8 -*-
"""
Errors: exception hierarchy shared by every style_transformer module
"""


class StyleTransferError(Exception):
    """Base class for all style_transformer errors."""


class ShapeMismatchError(StyleTransferError, ValueError):
    """Operand shapes are incompatible for the requested operation."""


class DimensionError(StyleTransferError, ValueError):
    """Spatial size violates a divisibility or minimum-size requirement."""


class ConfigError(StyleTransferError, ValueError):
    """Configuration value or key is invalid."""


class CheckpointError(StyleTransferError, ValueError):
    """Base class for checkpoint decoding and validation failures."""


class CorruptCheckpointError(CheckpointError):
    """Checkpoint bytes are truncated, have a bad magic, or fail to parse."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint was written with an unsupported format version."""


class CheckpointShapeError(CheckpointError):
    """Checkpoint tensor does not match the configured model."""

    def __init__(self, message: str, name: str = None):
        super().__init__(message)
        self.name = name


class ImageFormatError(StyleTransferError, ValueError):
    """Base class for image decoding failures."""


class MalformedHeaderError(ImageFormatError):
    """Image header does not follow the format."""


class UnexpectedEOFError(ImageFormatError):
    """Image data ends before the declared pixel count."""


class UnsupportedMaxvalError(ImageFormatError):
    """PPM maxval other than 255."""


class UndecodableImageError(ImageFormatError):
    """An image file could not be decoded; carries the offending path."""

    def __init__(self, path, reason: str):
        super().__init__(f"Cannot decode image {path}: {reason}")
        self.path = path


class AttentionIndexError(StyleTransferError, IndexError):
    """Attention capture requested outside the recorded layers or tokens."""


class MissingGradientError(StyleTransferError, RuntimeError):
    """Optimizer step requested for a parameter without a gradient."""


class EmptyDatasetError(StyleTransferError, ValueError):
    """Training directory contains no decodable image."""
