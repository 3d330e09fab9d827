# -*- coding: utf-8 -*-
"""
Model Config: typed architecture settings with desk and full-scale presets
"""
import math
from dataclasses import dataclass, field

from ..errors import ConfigError

TOKENIZERS = ("filter", "unfold")

# Stage-2 output of the style backbone feeds the unfold tokenizer.
UNFOLD_SOURCE_STAGE = 2


@dataclass
class BackboneConfig:
    """Residual backbone widths and depth."""

    base_width: int = 32
    content_tap_stage: int = 2
    style_tap_stage: int = 4
    blocks_per_stage: int = 1

    @property
    def stage_channels(self) -> tuple:
        return tuple(self.base_width * m for m in (1, 2, 4, 8))

    @property
    def stem_channels(self) -> int:
        return max(self.base_width // 4, 1)

    @staticmethod
    def stride(stage: int) -> int:
        """Spatial stride of a stage output relative to the input."""
        return 4 * 2 ** (stage - 1)

    def feature_shape(self, stage: int, height: int, width: int) -> tuple:
        """(channels, h, w) of a stage output for an input size, without running anything."""
        step = self.stride(stage)
        return (self.stage_channels[stage - 1], height // step, width // step)

    def validate(self):
        if self.base_width < 1:
            raise ConfigError(f"base_width must be >= 1, got {self.base_width}")
        if self.blocks_per_stage < 1:
            raise ConfigError(f"blocks_per_stage must be >= 1, got {self.blocks_per_stage}")
        for name in ("content_tap_stage", "style_tap_stage"):
            stage = getattr(self, name)
            if stage not in (1, 2, 3, 4):
                raise ConfigError(f"{name} must be in 1..4, got {stage}")


@dataclass
class TransformerConfig:
    """Encoder/decoder stack settings."""

    d: int = 64
    heads: int = 8
    encoder_layers: int = 6
    decoder_layers: int = 6
    ffn_hidden: int = None
    dropout: float = 0.0

    def __post_init__(self):
        if self.ffn_hidden is None:
            self.ffn_hidden = 4 * self.d

    @property
    def head_width(self) -> int:
        return self.d // self.heads

    def validate(self):
        if self.d < 1 or self.heads < 1:
            raise ConfigError(f"d and heads must be >= 1, got d={self.d}, heads={self.heads}")
        if self.d % self.heads:
            raise ConfigError(f"d={self.d} is not divisible by heads={self.heads}")
        if self.d % 4:
            raise ConfigError(f"d={self.d} must be divisible by 4 for 2D positional encodings")
        if self.encoder_layers < 1 or self.decoder_layers < 1:
            raise ConfigError("encoder_layers and decoder_layers must be >= 1")
        if self.ffn_hidden < 1:
            raise ConfigError(f"ffn_hidden must be >= 1, got {self.ffn_hidden}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")


@dataclass
class RbcConfig:
    """CNN decoder stages as (out_channels, upsample) pairs."""

    stages: list = field(default_factory=lambda: [(32, True), (16, True), (8, True), (3, False)])

    @classmethod
    def scaled(cls, width_factor: float, upsamples: int = 3) -> "RbcConfig":
        """
        Build the RBC stack for a width factor.

        Args:
            width_factor: Multiplier on the 256:128:64 channel ladder
            upsamples: Number of x2 stages (3 for a stride-8 content grid)

        Returns:
            RbcConfig
        """
        widths = [64 * 2 ** (upsamples - 1 - i) for i in range(upsamples)]
        stages = [(max(1, int(round(w * width_factor))), True) for w in widths]
        stages.append((3, False))
        return cls(stages=stages)

    @property
    def upsample_count(self) -> int:
        return sum(1 for _, up in self.stages if up)

    def validate(self, expected_upsamples: int = 3):
        if not self.stages:
            raise ConfigError("RBC decoder needs at least one stage")
        if self.upsample_count != expected_upsamples:
            raise ConfigError(
                f"RBC decoder needs exactly {expected_upsamples} upsampling stages, "
                f"got {self.upsample_count}"
            )
        channels, upsample = self.stages[-1]
        if channels != 3 or upsample:
            raise ConfigError("Final RBC stage must output 3 channels without upsampling")
        if any(c < 1 for c, _ in self.stages):
            raise ConfigError("RBC stage widths must be >= 1")


@dataclass
class ModelConfig:
    """Whole-network settings; the JSON ``model`` section maps onto these fields."""

    width_factor: float = 0.125
    d: int = 64
    heads: int = 8
    encoder_layers: int = 6
    decoder_layers: int = 6
    ffn_hidden: int = None
    dropout: float = 0.0
    content_tap_stage: int = 2
    style_tap_stage: int = 4
    blocks_per_stage: int = 1
    tokenizer: str = "filter"
    unfold_kernel: tuple = (2, 2)
    unfold_stride: tuple = (1, 1)

    @classmethod
    def desk(cls) -> "ModelConfig":
        return cls()

    @classmethod
    def full(cls) -> "ModelConfig":
        return cls(width_factor=1.0, d=256)

    @property
    def base_width(self) -> int:
        return max(1, int(round(256 * self.width_factor)))

    @property
    def content_stride(self) -> int:
        return BackboneConfig.stride(self.content_tap_stage)

    @property
    def style_backbone_depth(self) -> int:
        return UNFOLD_SOURCE_STAGE if self.tokenizer == "unfold" else self.style_tap_stage

    def backbone_config(self) -> BackboneConfig:
        return BackboneConfig(
            base_width=self.base_width,
            content_tap_stage=self.content_tap_stage,
            style_tap_stage=self.style_backbone_depth,
            blocks_per_stage=self.blocks_per_stage,
        )

    def transformer_config(self) -> TransformerConfig:
        return TransformerConfig(
            d=self.d,
            heads=self.heads,
            encoder_layers=self.encoder_layers,
            decoder_layers=self.decoder_layers,
            ffn_hidden=self.ffn_hidden,
            dropout=self.dropout,
        )

    def rbc_config(self) -> RbcConfig:
        return RbcConfig.scaled(self.width_factor, upsamples=int(math.log2(self.content_stride)))

    def validate(self):
        """
        Check every invariant before any weights are built.

        Raises:
            ConfigError: First violated invariant
        """
        if self.width_factor <= 0:
            raise ConfigError(f"width_factor must be > 0, got {self.width_factor}")
        if self.tokenizer not in TOKENIZERS:
            raise ConfigError(f"tokenizer must be one of {TOKENIZERS}, got {self.tokenizer!r}")
        for name in ("unfold_kernel", "unfold_stride"):
            value = tuple(getattr(self, name))
            if len(value) != 2 or any(int(v) < 1 for v in value):
                raise ConfigError(f"{name} must be two positive ints, got {value}")
        self.backbone_config().validate()
        self.transformer_config().validate()
        self.rbc_config().validate(expected_upsamples=int(math.log2(self.content_stride)))
        return self
