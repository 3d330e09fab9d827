# -*- coding: utf-8 -*-
"""
Adam: bias-corrected Adam updates over a list of parameter tensors
"""
from dataclasses import dataclass, field

import numpy as np

from ..errors import MissingGradientError, ShapeMismatchError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """First/second moment buffers mirroring the parameter shapes, plus the step counter."""

    first: list = field(default_factory=list)
    second: list = field(default_factory=list)
    step: int = 0

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(
            first=[np.zeros_like(p.data) for p in params],
            second=[np.zeros_like(p.data) for p in params],
        )


def adam_step(params, grads, state: AdamState, lr: float, names=None):
    """
    Apply one Adam update in place, then clear the parameters' gradients.

    Args:
        params: Parameter tensors
        grads: One gradient array per parameter, or None to read ``param.grad``
        state: Moments for the same parameter list
        lr: Learning rate (> 0)
        names: Optional parameter names for error messages

    Raises:
        MissingGradientError: A parameter has no gradient (nothing is updated)
    """
    params = list(params)
    grads = [p.grad for p in params] if grads is None else list(grads)
    if len(grads) != len(params) or len(state.first) != len(params):
        raise ShapeMismatchError(
            f"Adam got {len(params)} params, {len(grads)} grads, {len(state.first)} moment buffers"
        )
    for index, grad in enumerate(grads):
        if grad is None:
            label = names[index] if names else f"#{index}"
            raise MissingGradientError(f"Parameter {label} has no gradient")

    state.step += 1
    correction1 = 1.0 - BETA1 ** state.step
    correction2 = 1.0 - BETA2 ** state.step
    for param, grad, m, v in zip(params, grads, state.first, state.second):
        grad = np.asarray(grad, dtype=param.data.dtype)
        m *= BETA1
        m += (1.0 - BETA1) * grad
        v *= BETA2
        v += (1.0 - BETA2) * grad * grad
        param.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + EPSILON)
        param.grad = None


class Adam:
    """Adam optimizer bound to a module's named parameters."""

    def __init__(self, named_params, lr: float):
        if lr <= 0:
            raise ValueError(f"Learning rate must be > 0, got {lr}")
        named_params = list(named_params)
        self.names = [name for name, _ in named_params]
        self.params = [param for _, param in named_params]
        self.lr = lr
        self.state = AdamState.for_params(self.params)

    def step(self):
        adam_step(self.params, None, self.state, self.lr, names=self.names)

    def zero_grad(self):
        for param in self.params:
            param.grad = None
