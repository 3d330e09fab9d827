# -*- coding: utf-8 -*-
"""
Losses: content loss, feature-statistics style loss and their weighted total
"""
from dataclasses import dataclass, field

from ..errors import ShapeMismatchError
from ..tensor import Tensor, no_grad, ops
from .loss_network import LossNetwork


@dataclass
class LossBreakdown:
    """Scalar loss tensors of one step; ``total`` is the one to differentiate."""

    content: Tensor
    style: Tensor
    total: Tensor
    per_layer_style: list = field(default_factory=list)

    def as_record(self) -> dict:
        return {
            "content": self.content.item(),
            "style": self.style.item(),
            "total": self.total.item(),
        }


def content_distance(target: Tensor, output: Tensor) -> Tensor:
    """Mean squared difference of two feature maps."""
    if target.shape != output.shape:
        raise ShapeMismatchError(f"Content features differ in shape: {target.shape} vs {output.shape}")
    diff = ops.sub(output, target)
    return ops.mean(ops.mul(diff, diff))


def style_distance(targets: list, outputs: list):
    """
    Sum over taps of ||mean difference||_2 + ||std difference||_2, per channel vector.

    Args:
        targets: Style-image features, one per tap
        outputs: Output-image features, one per tap

    Returns:
        (total: Tensor scalar, per_layer: list of Tensor scalars)
    """
    if len(targets) != len(outputs):
        raise ShapeMismatchError(f"{len(targets)} style taps vs {len(outputs)} output taps")
    per_layer = []
    for target, output in zip(targets, outputs):
        mu_t, sigma_t = ops.channel_stats(target)
        mu_o, sigma_o = ops.channel_stats(output)
        per_layer.append(ops.add(ops.l2_norm(ops.sub(mu_t, mu_o)), ops.l2_norm(ops.sub(sigma_t, sigma_o))))
    total = per_layer[0]
    for term in per_layer[1:]:
        total = ops.add(total, term)
    return total, per_layer


def _check_same_size(a: Tensor, b: Tensor):
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Images differ in size: {a.shape} vs {b.shape}")


def content_loss(content: Tensor, output: Tensor, net: LossNetwork) -> Tensor:
    """Mean squared distance between the deepest tap features of two same-size images."""
    _check_same_size(content, output)
    with no_grad():
        target = net(content)[-1]
    return content_distance(target, net(output)[-1])


def style_loss(style: Tensor, output: Tensor, net: LossNetwork):
    """
    Feature-statistics distance; sizes of the two images may differ.

    Returns:
        (total: Tensor scalar, per_layer: list of Tensor scalars)
    """
    with no_grad():
        targets = net(style)
    return style_distance(targets, net(output))


def total_loss(content: Tensor, style: Tensor, output: Tensor, lam: float, net: LossNetwork) -> LossBreakdown:
    """
    Weighted sum content + lam * style, computing output features once.

    Args:
        content: Content image Tensor[1, 3, H, W]
        style: Style image Tensor[1, 3, Hs, Ws]
        output: Stylized image, same size as content
        lam: Style weight (>= 0)
        net: Frozen loss network

    Returns:
        LossBreakdown
    """
    if lam < 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    _check_same_size(content, output)
    with no_grad():
        content_target = net(content)[-1]
        style_targets = net(style)
    output_features = net(output)
    content_term = content_distance(content_target, output_features[-1])
    style_term, per_layer = style_distance(style_targets, output_features)
    total = ops.add(content_term, ops.scalar_mul(style_term, lam))
    return LossBreakdown(content_term, style_term, total, per_layer)
