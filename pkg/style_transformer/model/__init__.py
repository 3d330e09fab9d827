"""Feature extraction, transformer and reconstruction modules for style-transformer."""

from .backbone import Backbone, Bottleneck, extract_content_features, extract_style_features
from .cnn_decoder import CnnDecoder, RbcBlock, ResidualBlock, rbc_block, reconstruct
from .config import BackboneConfig, ModelConfig, RbcConfig, TransformerConfig
from .module import Conv2d, LayerNorm, Linear, Module
from .network import StyleTransformer, stylize
from .tokenizer import (
    TokenSequence,
    UnfoldProjection,
    flatten_features,
    positional_encoding,
    project_and_flatten,
    token_count,
    unfold_tokenize,
)
from .transformer import (
    AttentionMap,
    AttentionRecorder,
    DecoderLayer,
    EncoderLayer,
    MultiHeadAttention,
    StyleEncoder,
    TokenDecoder,
    attention,
    capture_attention,
    decode,
    encode_style,
)

__all__ = [
    "Backbone",
    "Bottleneck",
    "extract_content_features",
    "extract_style_features",
    "CnnDecoder",
    "RbcBlock",
    "ResidualBlock",
    "rbc_block",
    "reconstruct",
    "BackboneConfig",
    "ModelConfig",
    "RbcConfig",
    "TransformerConfig",
    "Conv2d",
    "LayerNorm",
    "Linear",
    "Module",
    "StyleTransformer",
    "stylize",
    "TokenSequence",
    "UnfoldProjection",
    "flatten_features",
    "positional_encoding",
    "project_and_flatten",
    "token_count",
    "unfold_tokenize",
    "AttentionMap",
    "AttentionRecorder",
    "DecoderLayer",
    "EncoderLayer",
    "MultiHeadAttention",
    "StyleEncoder",
    "TokenDecoder",
    "attention",
    "capture_attention",
    "decode",
    "encode_style",
]
