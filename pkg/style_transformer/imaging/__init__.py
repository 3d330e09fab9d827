"""Image buffers and file codecs for style-transformer."""

from .image import (
    PIL_AVAILABLE,
    ImageBuffer,
    center_crop,
    crop_to_multiple,
    decode_bytes,
    decode_image,
    decode_png,
    decode_ppm,
    encode_grayscale,
    encode_image,
    encode_ppm,
)

__all__ = [
    "PIL_AVAILABLE",
    "ImageBuffer",
    "center_crop",
    "crop_to_multiple",
    "decode_bytes",
    "decode_image",
    "decode_png",
    "decode_ppm",
    "encode_grayscale",
    "encode_image",
    "encode_ppm",
]
