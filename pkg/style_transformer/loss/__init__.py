"""Loss network and training losses for style-transformer."""

from .loss_network import LossConfig, LossNetwork, VggBlock, loss_features
from .losses import (
    LossBreakdown,
    content_distance,
    content_loss,
    style_distance,
    style_loss,
    total_loss,
)

__all__ = [
    "LossConfig",
    "LossNetwork",
    "VggBlock",
    "loss_features",
    "LossBreakdown",
    "content_distance",
    "content_loss",
    "style_distance",
    "style_loss",
    "total_loss",
]
