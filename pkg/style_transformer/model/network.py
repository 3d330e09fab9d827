# -*- coding: utf-8 -*-
"""
Network: the full content/style transformer from images to a stylized image
"""
import logging
import os

import numpy as np

from ..tensor import Tensor, no_grad
from .backbone import Backbone, extract_content_features, extract_style_features
from .cnn_decoder import CnnDecoder, reconstruct
from .config import ModelConfig
from .module import Conv2d, Linear, Module, uniform_init
from .tokenizer import UnfoldProjection, positional_encoding, project_and_flatten
from .transformer import AttentionRecorder, StyleEncoder, TokenDecoder, decode, encode_style


class StyleTransformer(Module):
    """
    Two backbones, token projections, style encoder, decoder and RBC reconstruction.

    Parameter paths (``named_parameters``) are the checkpoint entry names.
    """

    def __init__(self, config: ModelConfig = None, seed: int = 0):
        """
        Build and initialize every weight from one seeded generator.

        Args:
            config: Model configuration (desk preset when None)
            seed: Initialization seed
        """
        config = (config or ModelConfig.desk()).validate()
        rng = np.random.default_rng(seed)
        backbone_cfg = config.backbone_config()
        transformer_cfg = config.transformer_config()

        self.content_backbone = Backbone(backbone_cfg, config.content_tap_stage, rng)
        self.style_backbone = Backbone(backbone_cfg, config.style_backbone_depth, rng)
        self.content_projection = Conv2d(
            self.content_backbone.out_channels, config.d, 1, rng, init=uniform_init
        )
        if config.tokenizer == "unfold":
            kh, kw = config.unfold_kernel
            patch_width = self.style_backbone.out_channels * kh * kw
            self.style_projection = UnfoldProjection(
                Linear(patch_width, config.d, rng), config.unfold_kernel, config.unfold_stride
            )
        else:
            self.style_projection = Conv2d(
                self.style_backbone.out_channels, config.d, 1, rng, init=uniform_init
            )
        self.encoder = StyleEncoder(transformer_cfg, rng)
        self.decoder = TokenDecoder(transformer_cfg, rng)
        self.cnn_decoder = CnnDecoder(config.d, config.rbc_config(), rng)
        self._config = config
        self._trace = os.environ.get("STTR_DEBUG") == "1"

    @property
    def config(self) -> ModelConfig:
        return self._config

    def _trace_shape(self, label: str, shape):
        if self._trace:
            logging.info("[STTR DEBUG] %s: %s", label, shape)

    def tokenize_style(self, features: Tensor):
        if self._config.tokenizer == "unfold":
            return self.style_projection(features)
        return project_and_flatten(features, self.style_projection)

    def forward(self, content: Tensor, style: Tensor, recorder: AttentionRecorder = None) -> Tensor:
        """
        Stylize one content image with one style image.

        Args:
            content: Tensor[1, 3, Hc, Wc], sides divisible by 32
            style: Tensor[1, 3, Hs, Ws], sides divisible by 32
            recorder: Optional AttentionRecorder filled with every attention map

        Returns:
            Tensor[1, 3, Hc, Wc] in (0, 1)
        """
        d = self._config.d
        content_features = extract_content_features(content, self.content_backbone)
        style_features = extract_style_features(style, self.style_backbone)
        self._trace_shape("content features", content_features.shape)
        self._trace_shape("style features", style_features.shape)

        content_tokens = project_and_flatten(content_features, self.content_projection)
        style_tokens = self.tokenize_style(style_features)
        pos_c = positional_encoding(content_tokens.grid_h, content_tokens.grid_w, d)
        pos_s = positional_encoding(style_tokens.grid_h, style_tokens.grid_w, d)

        style_codes = encode_style(style_tokens, pos_s, self.encoder, recorder)
        decoded = decode(content_tokens, style_codes, pos_c, pos_s, self.decoder, recorder)
        self._trace_shape("decoded tokens", decoded.tokens.shape)
        output = reconstruct(decoded, self.cnn_decoder)
        self._trace_shape("output", output.shape)
        return output


def stylize(model: StyleTransformer, content: Tensor, style: Tensor, recorder=None) -> Tensor:
    """Inference pass: no graph recording, dropout disabled."""
    previous = model.training
    model.eval()
    try:
        with no_grad():
            return model(content, style, recorder)
    finally:
        model.train(previous)
