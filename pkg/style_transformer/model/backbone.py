# -*- coding: utf-8 -*-
"""
Backbone: residual feature extractors for the content and style streams
"""
import numpy as np

from ..errors import DimensionError
from ..tensor import Tensor, ops
from .config import BackboneConfig
from .module import Conv2d, Module

INPUT_MULTIPLE = 32


class Bottleneck(Module):
    """1x1 reduce, 3x3, 1x1 expand, with a projected shortcut when shapes change."""

    def __init__(self, in_channels: int, out_channels: int, stride: int, rng: np.random.Generator):
        mid = max(out_channels // 4, 1)
        self.reduce = Conv2d(in_channels, mid, 1, rng)
        self.spatial = Conv2d(mid, mid, 3, rng, stride=stride, padding=1)
        self.expand = Conv2d(mid, out_channels, 1, rng)
        if in_channels != out_channels or stride != 1:
            self.shortcut = Conv2d(in_channels, out_channels, 1, rng, stride=stride)
        else:
            self.shortcut = None

    def forward(self, x: Tensor) -> Tensor:
        out = ops.relu(self.reduce(x))
        out = ops.relu(self.spatial(out))
        out = self.expand(out)
        skip = x if self.shortcut is None else self.shortcut(x)
        return ops.relu(ops.add(out, skip))


class Backbone(Module):
    """
    Stem (7x7 stride 2 + 2x2 max-pool) followed by bottleneck stages 1..depth.

    Stage s output has stride 4 * 2**(s - 1) and ``cfg.stage_channels[s - 1]``
    channels. Stages past ``depth`` are never built.
    """

    def __init__(self, cfg: BackboneConfig, depth: int, rng: np.random.Generator):
        self.stem = Conv2d(3, cfg.stem_channels, 7, rng, stride=2, padding=3)
        self.stages = []
        in_channels = cfg.stem_channels
        for stage in range(1, depth + 1):
            out_channels = cfg.stage_channels[stage - 1]
            for block in range(cfg.blocks_per_stage):
                stride = 2 if stage > 1 and block == 0 else 1
                self.stages.append(Bottleneck(in_channels, out_channels, stride, rng))
                in_channels = out_channels
        self._depth = depth
        self._out_channels = in_channels

    @property
    def depth(self) -> int:
        return self._depth

    @property
    def out_channels(self) -> int:
        return self._out_channels

    def forward(self, image: Tensor) -> Tensor:
        x = ops.max_pool2d(ops.relu(self.stem(image)))
        for block in self.stages:
            x = block(x)
        return x


def check_image_size(image: Tensor, multiple: int = INPUT_MULTIPLE):
    """Raise DimensionError unless image is [1, 3, H, W] with H, W divisible by ``multiple``."""
    if image.ndim != 4 or image.shape[1] != 3:
        raise DimensionError(f"Expected an image tensor [N, 3, H, W], got {image.shape}")
    height, width = image.shape[2:]
    if height % multiple or width % multiple or height == 0 or width == 0:
        raise DimensionError(f"Image size {height}x{width} is not divisible by {multiple}")


def extract_content_features(image: Tensor, backbone: Backbone) -> Tensor:
    """
    Content features at the content tap stage (stride 8 by default).

    Args:
        image: Tensor[1, 3, Hc, Wc], sides divisible by 32
        backbone: Content backbone

    Returns:
        Tensor[1, C, Hc/stride, Wc/stride]
    """
    check_image_size(image)
    return backbone(image)


def extract_style_features(image: Tensor, backbone: Backbone) -> Tensor:
    """
    Style features at the style tap stage (stride 32 by default).

    Args:
        image: Tensor[1, 3, Hs, Ws], sides divisible by 32
        backbone: Style backbone

    Returns:
        Tensor[1, C, Hs/stride, Ws/stride]
    """
    check_image_size(image)
    return backbone(image)
