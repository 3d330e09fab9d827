# -*- coding: utf-8 -*-
"""
Gradient check: compare backward() against central finite differences
"""
import logging

import numpy as np

from ..errors import ShapeMismatchError
from .tensor import Tensor, backward, no_grad, precision


def grad_check(f, x: Tensor, eps: float = 1e-3, indices=None) -> float:
    """
    Maximum relative error between analytic and numeric gradients.

    Both passes run in 64-bit so the comparison measures the adjoint rules,
    not 32-bit rounding.

    Args:
        f: Callable mapping a tensor shaped like ``x`` to a scalar tensor
        x: Point at which to differentiate
        eps: Central-difference step (> 0)
        indices: Optional flat indices to check (all elements when None)

    Returns:
        max |analytic - numeric| / max(|analytic|, |numeric|, 1e-8)
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")

    base = np.asarray(x.data, dtype=np.float64)
    checked = range(base.size) if indices is None else indices

    with precision("float64"):
        point = Tensor(base, requires_grad=True)
        loss = f(point)
        if loss.size != 1:
            raise ShapeMismatchError(f"grad_check needs a scalar function, got shape {loss.shape}")
        backward(loss, targets=[point])
        analytic = np.zeros_like(base) if point.grad is None else point.grad

        worst = 0.0
        with no_grad():
            for flat in checked:
                shifted = base.copy()
                shifted.flat[flat] += eps
                plus = f(Tensor(shifted)).item()
                shifted.flat[flat] -= 2 * eps
                minus = f(Tensor(shifted)).item()
                numeric = (plus - minus) / (2 * eps)
                exact = float(analytic.flat[flat])
                error = abs(exact - numeric) / max(abs(exact), abs(numeric), 1e-8)
                worst = max(worst, error)

    logging.debug("grad_check: %d elements, max relative error %.3e", len(checked), worst)
    return worst
