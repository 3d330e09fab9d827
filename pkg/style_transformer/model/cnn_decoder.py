# -*- coding: utf-8 -*-
"""
CNN Decoder: RBC stack (residual block -> bilinear x2 -> 3x3 conv) back to RGB
"""
import numpy as np

from ..tensor import Tensor, ops
from .config import RbcConfig
from .module import Conv2d, Module
from .tokenizer import TokenSequence


class ResidualBlock(Module):
    """x + conv(relu(conv(x))), with a 1x1 projection when channel counts differ."""

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator):
        self.conv1 = Conv2d(in_channels, out_channels, 3, rng, padding=1)
        self.conv2 = Conv2d(out_channels, out_channels, 3, rng, padding=1)
        self.shortcut = (
            None if in_channels == out_channels else Conv2d(in_channels, out_channels, 1, rng)
        )

    def forward(self, x: Tensor) -> Tensor:
        out = self.conv2(ops.relu(self.conv1(x)))
        skip = x if self.shortcut is None else self.shortcut(x)
        return ops.add(out, skip)


class RbcBlock(Module):
    """Residual block, optional bilinear x2 upsample, 3x3 convolution."""

    def __init__(self, in_channels: int, out_channels: int, upsample: bool, rng: np.random.Generator):
        self.residual = ResidualBlock(in_channels, out_channels, rng)
        self.conv = Conv2d(out_channels, out_channels, 3, rng, padding=1)
        self._upsample = upsample

    @property
    def upsample(self) -> bool:
        return self._upsample

    def forward(self, x: Tensor) -> Tensor:
        x = self.residual(x)
        if self._upsample:
            x = ops.bilinear_upsample2x(x)
        return self.conv(x)


def rbc_block(x: Tensor, block: RbcBlock) -> Tensor:
    """
    Apply one RBC unit.

    Args:
        x: Tensor[1, C, h, w]
        block: RbcBlock built for C input channels

    Returns:
        Tensor[1, out_channels, 2h, 2w] when upsampling, [1, out_channels, h, w] otherwise
    """
    return block(x)


class CnnDecoder(Module):
    """RBC stages with ReLU between them and a sigmoid on the RGB output."""

    def __init__(self, d: int, cfg: RbcConfig, rng: np.random.Generator):
        self.blocks = []
        in_channels = d
        for out_channels, upsample in cfg.stages:
            self.blocks.append(RbcBlock(in_channels, out_channels, upsample, rng))
            in_channels = out_channels

    @property
    def scale(self) -> int:
        return 2 ** sum(1 for block in self.blocks if block.upsample)

    def forward(self, feature_map: Tensor) -> Tensor:
        x = feature_map
        last = len(self.blocks) - 1
        for index, block in enumerate(self.blocks):
            x = block(x)
            if index != last:
                x = ops.relu(x)
        return ops.sigmoid(x)


def reconstruct(decoded: TokenSequence, decoder: CnnDecoder) -> Tensor:
    """
    Reshape decoded tokens to a feature map and decode to an image in [0, 1].

    Args:
        decoded: TokenSequence carrying its grid
        decoder: CnnDecoder built from an RbcConfig

    Returns:
        Tensor[1, 3, scale * grid_h, scale * grid_w] (scale 8 by default)
    """
    return decoder(decoded.to_feature_map())
