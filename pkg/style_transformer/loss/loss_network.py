# -*- coding: utf-8 -*-
"""
Loss Network: frozen VGG-style feature extractor with taps relu1_1..relu4_1
"""
import logging
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DimensionError
from ..model.module import Conv2d, Module
from ..tensor import Tensor, ops

# (base width, convolutions) per block; the first conv of each block is the tap
VGG_BLOCKS = ((64, 2), (128, 2), (256, 4), (512, 1))
TAP_NAMES = ("relu1_1", "relu2_1", "relu3_1", "relu4_1")
LOSS_INPUT_MULTIPLE = 8


@dataclass
class LossConfig:
    """Loss-network settings (the JSON ``loss`` section; its ``lambda`` feeds TrainConfig)."""

    loss_net: str = "random"
    seed: int = 0
    width_factor: float = 0.25
    tap_layers: tuple = (1, 2, 3, 4)

    def __post_init__(self):
        self.tap_layers = tuple(self.tap_layers)

    def validate(self):
        if self.width_factor <= 0:
            raise ConfigError(f"loss width_factor must be > 0, got {self.width_factor}")
        if not self.tap_layers:
            raise ConfigError("tap_layers must name at least one tap")
        if list(self.tap_layers) != sorted(set(self.tap_layers)) or any(
            t not in (1, 2, 3, 4) for t in self.tap_layers
        ):
            raise ConfigError(f"tap_layers must be increasing values in 1..4, got {self.tap_layers}")
        if not self.loss_net:
            raise ConfigError("loss_net must be 'random' or a weight file path")
        return self


class VggBlock(Module):
    """Conv-ReLU stack; the first activation is the block's tap."""

    def __init__(self, in_channels: int, width: int, convs: int, rng: np.random.Generator):
        self.convs = []
        for _ in range(convs):
            self.convs.append(Conv2d(in_channels, width, 3, rng, padding=1))
            in_channels = width

    def forward(self, x: Tensor, tap_only: bool = False):
        tap = ops.relu(self.convs[0](x))
        if tap_only:
            return tap, tap
        out = tap
        for conv in self.convs[1:]:
            out = ops.relu(conv(out))
        return tap, out


class LossNetwork(Module):
    """
    Frozen feature extractor for the content and style losses.

    Tap i has stride 2**(i - 1) and (64, 128, 256, 512)[i - 1] * width_factor
    channels. Only blocks up to the deepest requested tap are built.
    """

    def __init__(self, width_factor: float = 0.25, tap_layers=(1, 2, 3, 4), seed: int = 0):
        rng = np.random.default_rng(seed)
        self._taps = tuple(tap_layers)
        self.blocks = []
        in_channels = 3
        for base, convs in VGG_BLOCKS[: max(self._taps)]:
            width = max(1, int(round(base * width_factor)))
            self.blocks.append(VggBlock(in_channels, width, convs, rng))
            in_channels = width
        self._source = f"fixed_random(seed={seed})"
        self.freeze()
        logging.debug("Loss network taps: %s", [TAP_NAMES[t - 1] for t in self._taps])

    @classmethod
    def from_config(cls, config: LossConfig) -> "LossNetwork":
        """Random fixed weights, or weights read from ``config.loss_net`` when it is a path."""
        net = cls(config.width_factor, config.tap_layers, config.seed)
        if config.loss_net != "random":
            net.load_weights(config.loss_net)
        return net

    def load_weights(self, path):
        """Replace the weights with a checkpoint file's entries; names must match exactly."""
        from ..trainer.checkpoint import load_checkpoint  # pylint: disable=import-outside-toplevel

        self.load_state_dict(load_checkpoint(path, expected_shapes=self.parameter_shapes()))
        self.freeze()
        self._source = f"loaded({path})"
        logging.info("Loaded loss-network weights from %s", path)

    @property
    def source(self) -> str:
        return self._source

    @property
    def tap_layers(self) -> tuple:
        return self._taps

    def tap_channels(self, tap: int) -> int:
        return self.blocks[tap - 1].convs[0].out_channels

    def forward(self, image: Tensor) -> list:
        """
        Features at the configured taps, shallowest first.

        Args:
            image: Tensor[1, 3, H, W] in [0, 1], H and W divisible by 8

        Returns:
            list of Tensor, one per tap in ``tap_layers``
        """
        if image.ndim != 4 or image.shape[1] != 3:
            raise DimensionError(f"Loss network expects [N, 3, H, W], got {image.shape}")
        height, width = image.shape[2:]
        if height % LOSS_INPUT_MULTIPLE or width % LOSS_INPUT_MULTIPLE:
            raise DimensionError(
                f"Loss network input {height}x{width} is not divisible by {LOSS_INPUT_MULTIPLE}"
            )
        features = []
        x = image
        for index, block in enumerate(self.blocks):
            if index:
                x = ops.max_pool2d(x)
            tap, x = block(x, tap_only=index == len(self.blocks) - 1)
            if index + 1 in self._taps:
                features.append(tap)
        return features


def loss_features(image: Tensor, net: LossNetwork) -> list:
    """Loss-network features [f1, f2, f3, f4] (or the configured subset)."""
    return net(image)
