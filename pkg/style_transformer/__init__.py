"""
Style Transformer: a Python package for transformer-based image style transfer.

This package provides functionality for:
- Building the content/style transformer (backbones, tokenizers, encoder, decoder, RBC decoder)
- Training it with a frozen loss network, content loss and feature-statistics style loss
- Stylizing images and video frames, exporting attention maps, benchmarking
"""

__version__ = "0.1.0"

from .errors import StyleTransferError
from .model import ModelConfig, StyleTransformer, stylize
from .loss import LossConfig, LossNetwork, total_loss
from .trainer import TrainConfig, Trainer, load_checkpoint, save_checkpoint, train
from .imaging import ImageBuffer, decode_image, encode_image

__all__ = [
    "StyleTransferError",
    "ModelConfig",
    "StyleTransformer",
    "stylize",
    "LossConfig",
    "LossNetwork",
    "total_loss",
    "TrainConfig",
    "Trainer",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "ImageBuffer",
    "decode_image",
    "encode_image",
]
