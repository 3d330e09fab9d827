# -*- coding: utf-8 -*-
"""
Module: parameter containers and the basic layers of the network

Parameters are ``Tensor`` attributes; submodules are ``Module`` attributes or
lists of modules. ``named_parameters`` walks attributes in definition order, so
parameter paths are stable and double as checkpoint entry names.
"""
import math

import numpy as np

from ..errors import CheckpointShapeError
from ..tensor import Tensor, ops


def uniform_init(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    """U(-1/sqrt(fan_in), 1/sqrt(fan_in)) initial values."""
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


def he_init(rng: np.random.Generator, shape: tuple, fan_in: int) -> np.ndarray:
    """N(0, 2/fan_in) initial values for ReLU stacks."""
    return (rng.standard_normal(size=shape) * math.sqrt(2.0 / fan_in)).astype(np.float32)


class Module:
    """Base class for everything that owns parameters."""

    training = True

    def named_parameters(self, prefix: str = ""):
        """
        Yield (dotted path, tensor) pairs.

        Args:
            prefix: Path prefix for nested modules

        Yields:
            tuple: (name, Tensor)
        """
        for name, value in vars(self).items():
            if name.startswith("_"):
                continue
            path = f"{prefix}{name}"
            if isinstance(value, Tensor):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")
            elif isinstance(value, (list, tuple)):
                for index, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{index}.")

    def modules(self):
        """Yield this module and every nested module."""
        yield self
        for value in vars(self).values():
            if isinstance(value, Module):
                yield from value.modules()
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        yield from item.modules()

    def parameters(self) -> list:
        return [tensor for _, tensor in self.named_parameters()]

    def parameter_count(self) -> int:
        return int(sum(tensor.size for tensor in self.parameters()))

    def state_dict(self) -> dict:
        """Copy of every parameter as a float32 array, keyed by path."""
        return {name: tensor.data.astype(np.float32).copy() for name, tensor in self.named_parameters()}

    def parameter_shapes(self) -> dict:
        return {name: tensor.shape for name, tensor in self.named_parameters()}

    def load_state_dict(self, weights: dict):
        """
        Overwrite parameters from a name -> array map.

        Args:
            weights: Must contain exactly this module's parameter paths

        Raises:
            CheckpointShapeError: Missing, unexpected or mis-shaped tensor
        """
        own = dict(self.named_parameters())
        for name in weights:
            if name not in own:
                raise CheckpointShapeError(f"Unexpected tensor in weights: {name}", name=name)
        for name, tensor in own.items():
            if name not in weights:
                raise CheckpointShapeError(f"Missing tensor in weights: {name}", name=name)
            value = np.asarray(weights[name])
            if value.shape != tensor.shape:
                raise CheckpointShapeError(
                    f"Shape mismatch for {name}: expected {tensor.shape}, got {value.shape}",
                    name=name,
                )
        for name, tensor in own.items():
            tensor.data = np.array(weights[name], dtype=np.float32)
            tensor.grad = None

    def freeze(self):
        """Stop gradient tracking for every parameter."""
        for tensor in self.parameters():
            tensor.requires_grad = False
            tensor.grad = None

    def zero_grad(self):
        for tensor in self.parameters():
            tensor.grad = None

    def train(self, mode: bool = True):
        for module in self.modules():
            module.training = mode
        return self

    def eval(self):
        return self.train(False)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError


class Conv2d(Module):
    """2D convolution layer."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        stride: int = 1,
        padding: int = 0,
        bias: bool = True,
        init=he_init,
    ):
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = Tensor(
            init(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_channels, dtype=np.float32), requires_grad=True) if bias else None
        self._stride = stride
        self._padding = padding

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    def forward(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, stride=self._stride, padding=self._padding)


class Linear(Module):
    """Affine map y = x W + b over the last axis."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        self.weight = Tensor(
            uniform_init(rng, (in_features, out_features), in_features), requires_grad=True
        )
        self.bias = Tensor(np.zeros(out_features, dtype=np.float32), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return ops.add(ops.matmul(x, self.weight), self.bias)


class LayerNorm(Module):
    """Layer normalization over the last axis with learned gain and offset."""

    def __init__(self, features: int):
        self.gain = Tensor(np.ones(features, dtype=np.float32), requires_grad=True)
        self.offset = Tensor(np.zeros(features, dtype=np.float32), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x, axis=-1, gain=self.gain, offset=self.offset)
