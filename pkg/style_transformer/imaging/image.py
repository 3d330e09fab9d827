# -*- coding: utf-8 -*-
"""
Image: RGB buffers, PPM (P6) and PNG codecs, cropping and tensor conversion
"""
import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    from PIL import Image, UnidentifiedImageError

    PIL_AVAILABLE = True
except ImportError:
    PIL_AVAILABLE = False
    logging.warning("PIL not available. PNG input and output will not work.")

from ..errors import (
    DimensionError,
    ImageFormatError,
    MalformedHeaderError,
    UnexpectedEOFError,
    UnsupportedMaxvalError,
)
from ..tensor import Tensor

PPM_MAGIC = b"P6"
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
PPM_WHITESPACE = b" \t\n\r\x0b\x0c"
MAXVAL = 255


@dataclass
class ImageBuffer:
    """Row-major RGB pixels in [0, 1], shape (height, width, 3), float32."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float32)
        if self.width < 1 or self.height < 1:
            raise DimensionError(f"Image size must be positive, got {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise DimensionError(
                f"Pixel array {self.pixels.shape} does not match {self.height}x{self.width}x3"
            )

    @classmethod
    def from_bytes8(cls, data: np.ndarray) -> "ImageBuffer":
        """Build from an (H, W, 3) uint8 array; each byte b maps to b / 255."""
        height, width = data.shape[:2]
        return cls(width, height, data.astype(np.float32) / np.float32(MAXVAL))

    def to_bytes8(self) -> np.ndarray:
        return np.round(np.clip(self.pixels, 0.0, 1.0) * MAXVAL).astype(np.uint8)

    @classmethod
    def from_tensor(cls, tensor: Tensor) -> "ImageBuffer":
        """Tensor[1, 3, H, W] -> ImageBuffer."""
        data = np.asarray(tensor.numpy())
        if data.ndim != 4 or data.shape[:2] != (1, 3):
            raise DimensionError(f"Expected an image tensor [1, 3, H, W], got {data.shape}")
        return cls(data.shape[3], data.shape[2], data[0].transpose(1, 2, 0))

    def to_tensor(self) -> Tensor:
        """ImageBuffer -> Tensor[1, 3, H, W]."""
        return Tensor(self.pixels.transpose(2, 0, 1)[None])

    def crop(self, top: int, left: int, height: int, width: int) -> "ImageBuffer":
        return ImageBuffer(width, height, self.pixels[top : top + height, left : left + width].copy())


def _skip_separators(blob: bytes, pos: int) -> int:
    while pos < len(blob):
        if blob[pos] in PPM_WHITESPACE:
            pos += 1
        elif blob[pos] == ord("#"):
            while pos < len(blob) and blob[pos] not in b"\r\n":
                pos += 1
        else:
            break
    return pos


def _read_header_int(blob: bytes, pos: int, field_name: str, source: str):
    pos = _skip_separators(blob, pos)
    start = pos
    while pos < len(blob) and blob[pos] not in PPM_WHITESPACE:
        pos += 1
    token = blob[start:pos]
    if not token:
        raise MalformedHeaderError(f"{source}: header ends before {field_name}")
    if not token.isdigit():
        raise MalformedHeaderError(f"{source}: {field_name} is not a decimal integer: {token!r}")
    return int(token), pos


def decode_ppm(blob: bytes, source: str = "<bytes>") -> ImageBuffer:
    """
    Decode a binary PPM.

    Args:
        blob: File bytes: "P6", whitespace, width, height, maxval 255, one whitespace, RGB bytes
        source: Name used in error messages

    Returns:
        ImageBuffer
    """
    if blob[:2] != PPM_MAGIC or len(blob) < 3 or blob[2] not in PPM_WHITESPACE:
        raise MalformedHeaderError(f"{source}: missing P6 magic")
    width, pos = _read_header_int(blob, 2, "width", source)
    height, pos = _read_header_int(blob, pos, "height", source)
    maxval, pos = _read_header_int(blob, pos, "maxval", source)
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"{source}: invalid size {width}x{height}")
    if maxval != MAXVAL:
        raise UnsupportedMaxvalError(f"{source}: maxval {maxval} is not supported (only 255)")
    if pos >= len(blob):
        raise UnexpectedEOFError(f"{source}: no pixel data after header")
    # exactly one whitespace byte separates maxval from the raster
    pos += 1
    needed = width * height * 3
    raster = blob[pos : pos + needed]
    if len(raster) < needed:
        raise UnexpectedEOFError(f"{source}: expected {needed} pixel bytes, found {len(raster)}")
    data = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer.from_bytes8(data)


def encode_ppm(buffer: ImageBuffer) -> bytes:
    header = f"P6\n{buffer.width} {buffer.height}\n{MAXVAL}\n".encode("ascii")
    return header + buffer.to_bytes8().tobytes()


def _require_pil():
    if not PIL_AVAILABLE:
        raise ImageFormatError("PNG support requires Pillow. Please install pillow.")


def decode_png(blob: bytes, source: str = "<bytes>") -> ImageBuffer:
    _require_pil()
    try:
        with Image.open(io.BytesIO(blob)) as img:
            data = np.asarray(img.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise ImageFormatError(f"{source}: cannot decode PNG: {e}") from e
    return ImageBuffer.from_bytes8(data)


def decode_bytes(blob: bytes, source: str = "<bytes>") -> ImageBuffer:
    """Decode PPM or PNG bytes, chosen by signature."""
    if blob.startswith(PNG_SIGNATURE):
        return decode_png(blob, source)
    if blob.startswith(PPM_MAGIC):
        return decode_ppm(blob, source)
    raise ImageFormatError(f"{source}: unrecognized image format (expected P6 PPM or PNG)")


def decode_image(path) -> ImageBuffer:
    """
    Read an image file.

    Args:
        path: PPM (P6, maxval 255) or PNG file

    Returns:
        ImageBuffer
    """
    path = Path(path)
    return decode_bytes(path.read_bytes(), str(path))


def encode_image(buffer: ImageBuffer, path):
    """
    Write an image file; ``.png`` uses Pillow, every other suffix writes P6 PPM.

    Args:
        buffer: Image to write
        path: Output path
    """
    path = Path(path)
    if path.suffix.lower() == ".png":
        _require_pil()
        Image.fromarray(buffer.to_bytes8()).save(path, format="PNG")
    else:
        path.write_bytes(encode_ppm(buffer))
    logging.debug("Wrote %dx%d image to %s", buffer.width, buffer.height, path)


def encode_grayscale(values: np.ndarray, path):
    """
    Write a 2D array in [0, 1] as a grayscale image (PNG mode "L", or gray P6).

    Args:
        values: (h, w) array
        path: Output path
    """
    values = np.clip(np.asarray(values, dtype=np.float32), 0.0, 1.0)
    path = Path(path)
    if path.suffix.lower() == ".png":
        _require_pil()
        gray = np.round(values * MAXVAL).astype(np.uint8)
        Image.fromarray(gray).convert("L").save(path, format="PNG")
        return
    rgb = np.repeat(values[:, :, None], 3, axis=2)
    encode_image(ImageBuffer(values.shape[1], values.shape[0], rgb), path)


def center_crop(buffer: ImageBuffer, height: int, width: int) -> ImageBuffer:
    """Central height x width window; DimensionError when the image is smaller."""
    if height > buffer.height or width > buffer.width:
        raise DimensionError(
            f"Cannot crop {buffer.width}x{buffer.height} image to {width}x{height}"
        )
    if (height, width) == (buffer.height, buffer.width):
        return buffer
    top = (buffer.height - height) // 2
    left = (buffer.width - width) // 2
    return buffer.crop(top, left, height, width)


def crop_to_multiple(buffer: ImageBuffer, multiple: int = 32) -> ImageBuffer:
    """Center-crop each side down to the largest multiple of ``multiple``."""
    height = buffer.height - buffer.height % multiple
    width = buffer.width - buffer.width % multiple
    if height == 0 or width == 0:
        raise DimensionError(
            f"Image {buffer.width}x{buffer.height} is smaller than {multiple}x{multiple}"
        )
    return center_crop(buffer, height, width)
