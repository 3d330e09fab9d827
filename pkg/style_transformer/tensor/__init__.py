"""Tensor math and reverse-mode differentiation for style-transformer."""

from .tensor import (
    ComputeGraph,
    Node,
    Tensor,
    as_tensor,
    backward,
    default_dtype,
    is_grad_enabled,
    no_grad,
    precision,
)
from .ops import (
    add,
    bilinear_upsample2x,
    channel_stats,
    conv2d,
    dropout,
    l2_norm,
    layer_norm,
    matmul,
    max_pool2d,
    mean,
    mul,
    relu,
    reshape,
    scalar_mul,
    sigmoid,
    softmax,
    sub,
    transpose,
    unfold,
)
from .gradcheck import grad_check

__all__ = [
    "ComputeGraph",
    "Node",
    "Tensor",
    "as_tensor",
    "backward",
    "default_dtype",
    "is_grad_enabled",
    "no_grad",
    "precision",
    "add",
    "bilinear_upsample2x",
    "channel_stats",
    "conv2d",
    "dropout",
    "l2_norm",
    "layer_norm",
    "matmul",
    "max_pool2d",
    "mean",
    "mul",
    "relu",
    "reshape",
    "scalar_mul",
    "sigmoid",
    "softmax",
    "sub",
    "transpose",
    "unfold",
    "grad_check",
]
