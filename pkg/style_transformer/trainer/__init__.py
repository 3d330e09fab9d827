"""Optimizer, checkpoints, data loading and the training loop for style-transformer."""

from .adam import Adam, AdamState, adam_step
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .data import PairLoader, list_images, load_training_image, sample_pairs
from .train import TrainConfig, Trainer, TrainResult, train

__all__ = [
    "Adam",
    "AdamState",
    "adam_step",
    "Checkpoint",
    "load_checkpoint",
    "save_checkpoint",
    "PairLoader",
    "list_images",
    "load_training_image",
    "sample_pairs",
    "TrainConfig",
    "Trainer",
    "TrainResult",
    "train",
]
