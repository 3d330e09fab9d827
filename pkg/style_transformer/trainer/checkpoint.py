# -*- coding: utf-8 -*-
"""
Checkpoint: binary named-tensor weight files

Layout (little-endian):
    b"STTR" | u32 version | u32 count |
    count x (u32 name_len | name utf-8 | u32 rank | rank x u32 dim | float32 data)
"""
import logging
import math
import struct
from pathlib import Path

import numpy as np

from ..errors import (
    CheckpointError,
    CheckpointShapeError,
    CheckpointVersionError,
    CorruptCheckpointError,
)

MAGIC = b"STTR"
VERSION = 1
_U32 = struct.Struct("<I")


class Checkpoint:
    """Ordered map of tensor name to float32 array, with its byte encoding."""

    def __init__(self, entries: dict, version: int = VERSION):
        """
        Initialize checkpoint.

        Args:
            entries: name -> array-like (stored as float32)
            version: Format version
        """
        self.version = version
        self.entries = {
            name: np.ascontiguousarray(value, dtype="<f4") for name, value in entries.items()
        }

    @classmethod
    def from_bytes(cls, blob: bytes) -> "Checkpoint":
        """
        Decode a checkpoint; the whole blob is parsed before anything is returned.

        Args:
            blob: Encoded bytes

        Returns:
            Checkpoint instance
        """
        reader = _Reader(blob)
        if reader.take(len(MAGIC)) != MAGIC:
            raise CorruptCheckpointError("Bad magic: not a checkpoint file")
        version = reader.u32()
        if version != VERSION:
            raise CheckpointVersionError(f"Unsupported checkpoint version {version} (expected {VERSION})")
        count = reader.u32()
        entries = {}
        for _ in range(count):
            try:
                name = reader.take(reader.u32()).decode("utf-8")
            except UnicodeDecodeError as e:
                raise CorruptCheckpointError(f"Tensor name is not UTF-8: {e}") from e
            if name in entries:
                raise CorruptCheckpointError(f"Duplicate tensor name {name!r}")
            rank = reader.u32()
            shape = tuple(reader.u32() for _ in range(rank))
            size = math.prod(shape)
            if 4 * size > reader.remaining:
                raise CorruptCheckpointError(
                    f"Tensor {name!r} declares shape {shape} but only {reader.remaining} bytes remain"
                )
            data = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape)
            entries[name] = data.copy()
        if not reader.exhausted:
            raise CorruptCheckpointError(f"{reader.remaining} trailing bytes after last tensor")
        return cls(entries, version)

    def to_bytes(self) -> bytes:
        """Encode to the binary layout."""
        parts = [MAGIC, _U32.pack(self.version), _U32.pack(len(self.entries))]
        for name, value in self.entries.items():
            encoded = name.encode("utf-8")
            parts.append(_U32.pack(len(encoded)))
            parts.append(encoded)
            parts.append(_U32.pack(value.ndim))
            parts.extend(_U32.pack(dim) for dim in value.shape)
            parts.append(value.tobytes())
        return b"".join(parts)

    def validate_shapes(self, expected: dict):
        """
        Check names and shapes against a model's parameter shapes.

        Raises:
            CheckpointShapeError: naming the first offending tensor
        """
        for name, shape in expected.items():
            if name not in self.entries:
                raise CheckpointShapeError(f"Checkpoint is missing tensor {name}", name=name)
            if tuple(self.entries[name].shape) != tuple(shape):
                raise CheckpointShapeError(
                    f"Tensor {name} has shape {self.entries[name].shape}, model expects {tuple(shape)}",
                    name=name,
                )
        for name in self.entries:
            if name not in expected:
                raise CheckpointShapeError(f"Checkpoint has unexpected tensor {name}", name=name)

    def __repr__(self):
        return f"<Checkpoint version={self.version} tensors={len(self.entries)}>"


class _Reader:
    def __init__(self, blob: bytes):
        self._blob = memoryview(blob)
        self._offset = 0

    def take(self, size: int) -> bytes:
        end = self._offset + size
        if end > len(self._blob):
            raise CorruptCheckpointError(
                f"Checkpoint truncated: needed {size} bytes at offset {self._offset}"
            )
        chunk = bytes(self._blob[self._offset : end])
        self._offset = end
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    @property
    def remaining(self) -> int:
        return len(self._blob) - self._offset

    @property
    def exhausted(self) -> bool:
        return self.remaining == 0


def save_checkpoint(path, weights: dict):
    """
    Write a weight map to ``path``.

    Args:
        path: Output file
        weights: name -> array
    """
    path = Path(path)
    blob = Checkpoint(weights).to_bytes()
    path.write_bytes(blob)
    logging.info("Saved checkpoint with %d tensors to %s (%d bytes)", len(weights), path, len(blob))


def load_checkpoint(path, expected_shapes: dict = None) -> dict:
    """
    Read a weight map from ``path``.

    Args:
        path: Checkpoint file
        expected_shapes: Optional name -> shape map (e.g. ``model.parameter_shapes()``)

    Returns:
        dict name -> float32 array
    """
    blob = Path(path).read_bytes()
    try:
        checkpoint = Checkpoint.from_bytes(blob)
    except CheckpointError:
        raise
    except (ValueError, MemoryError) as e:
        raise CorruptCheckpointError(f"{path}: cannot decode checkpoint: {e}") from e
    if expected_shapes is not None:
        checkpoint.validate_shapes(expected_shapes)
    logging.info("Loaded %r from %s", checkpoint, path)
    return {name: value.astype(np.float32) for name, value in checkpoint.entries.items()}
