# -*- coding: utf-8 -*-
"""
Tokenizer: turn feature maps into token sequences and build positional encodings
"""
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, ShapeMismatchError
from ..tensor import Tensor, ops
from .module import Conv2d, Linear, Module

POSITION_TEMPERATURE = 10000.0


def _pair(value) -> tuple:
    return tuple(int(v) for v in value) if isinstance(value, (tuple, list)) else (int(value), int(value))


@dataclass
class TokenSequence:
    """Tokens in row-major grid order: row i sits at (i // grid_w, i % grid_w)."""

    tokens: Tensor
    grid_h: int
    grid_w: int

    def __post_init__(self):
        if self.tokens.ndim != 2:
            raise ShapeMismatchError(f"Tokens must be [L, d], got {self.tokens.shape}")

    @property
    def length(self) -> int:
        return self.tokens.shape[0]

    @property
    def width(self) -> int:
        return self.tokens.shape[1]

    def to_feature_map(self) -> Tensor:
        """Inverse of flattening: Tensor[1, d, grid_h, grid_w]."""
        if self.length != self.grid_h * self.grid_w:
            raise ShapeMismatchError(
                f"{self.length} tokens do not fill a {self.grid_h}x{self.grid_w} grid"
            )
        return ops.reshape(ops.transpose(self.tokens, (1, 0)), (1, self.width, self.grid_h, self.grid_w))


def flatten_features(features: Tensor) -> TokenSequence:
    """Tensor[1, C, h, w] -> TokenSequence of h*w rows of width C."""
    if features.ndim != 4 or features.shape[0] != 1:
        raise ShapeMismatchError(f"Expected features [1, C, h, w], got {features.shape}")
    _, channels, h, w = features.shape
    tokens = ops.transpose(ops.reshape(features, (channels, h * w)), (1, 0))
    return TokenSequence(tokens, h, w)


def project_and_flatten(features: Tensor, projection: Conv2d) -> TokenSequence:
    """
    Map features to width d with a 1x1 convolution and flatten row-major.

    Args:
        features: Tensor[1, C, h, w]
        projection: 1x1 convolution from C to d channels

    Returns:
        TokenSequence with h*w tokens of width d
    """
    return flatten_features(projection(features))


def token_count(spatial, kernel, stride) -> int:
    """
    Number of sliding windows an unfold produces.

    Args:
        spatial: (H, W)
        kernel: (kh, kw), each no larger than spatial
        stride: (sh, sw)

    Returns:
        prod(floor((spatial - kernel) / stride) + 1)
    """
    count = 1
    for size, k, s in zip(_pair(spatial), _pair(kernel), _pair(stride)):
        if k > size:
            raise ShapeMismatchError(f"Kernel {kernel} exceeds spatial size {spatial}")
        count *= (size - k) // s + 1
    return count


def unfold_tokenize(features: Tensor, kernel, stride) -> TokenSequence:
    """
    Slide local blocks over a feature map, one token per block.

    Args:
        features: Tensor[1, C, H, W]
        kernel: (kh, kw)
        stride: (sh, sw)

    Returns:
        TokenSequence of L tokens with width C*kh*kw, grid = windows per axis
    """
    if features.ndim != 4 or features.shape[0] != 1:
        raise ShapeMismatchError(f"Expected features [1, C, H, W], got {features.shape}")
    _, _, h, w = features.shape
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    cols = ops.unfold(features, (kh, kw), (sh, sw))
    width, length = cols.shape[1], cols.shape[2]
    tokens = ops.transpose(ops.reshape(cols, (width, length)), (1, 0))
    return TokenSequence(tokens, (h - kh) // sh + 1, (w - kw) // sw + 1)


class UnfoldProjection(Module):
    """Unfold tokenizer followed by a learned linear map to width d."""

    def __init__(self, linear: Linear, kernel, stride):
        self.linear = linear
        self._kernel = _pair(kernel)
        self._stride = _pair(stride)

    def forward(self, features: Tensor) -> TokenSequence:
        raw = unfold_tokenize(features, self._kernel, self._stride)
        return TokenSequence(self.linear(raw.tokens), raw.grid_h, raw.grid_w)


def _axis_encoding(positions: np.ndarray, channels: int) -> np.ndarray:
    pairs = np.arange(channels // 2, dtype=np.float64)
    inv_freq = 1.0 / POSITION_TEMPERATURE ** (2.0 * pairs / channels)
    angles = positions[:, None] * inv_freq[None, :]
    enc = np.empty((positions.size, channels), dtype=np.float64)
    enc[:, 0::2] = np.sin(angles)
    enc[:, 1::2] = np.cos(angles)
    return enc


def positional_encoding(grid_h: int, grid_w: int, d: int) -> Tensor:
    """
    Fixed 2D sinusoidal encoding: first d/2 channels encode the row, the rest the column.

    Args:
        grid_h: Token grid height
        grid_w: Token grid width
        d: Token width, divisible by 4

    Returns:
        Tensor[grid_h * grid_w, d] (constant, no gradient)
    """
    if d % 4:
        raise ConfigError(f"Positional encoding width must be divisible by 4, got {d}")
    half = d // 2
    rows = _axis_encoding(np.arange(grid_h, dtype=np.float64), half)
    cols = _axis_encoding(np.arange(grid_w, dtype=np.float64), half)
    enc = np.concatenate(
        [np.repeat(rows, grid_w, axis=0), np.tile(cols, (grid_h, 1))],
        axis=1,
    )
    return Tensor(enc)
