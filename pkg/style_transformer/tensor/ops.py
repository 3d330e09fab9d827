# -*- coding: utf-8 -*-
"""
Ops: differentiable primitives used by the style transfer network

Every function takes tensors, computes the forward value with numpy and
records the adjoint rule through ``record``. Broadcasting is trailing-only:
an operand may be broadcast when its shape equals the trailing dimensions of
the other operand.
"""
import numpy as np

from ..errors import DimensionError, ShapeMismatchError
from .tensor import Tensor, as_tensor, record

# Variance floor for channel statistics and layer normalization
NORM_EPS = 1e-5


def _check_trailing(a_shape: tuple, b_shape: tuple, op: str):
    if a_shape == b_shape:
        return
    short, long_ = (a_shape, b_shape) if len(a_shape) <= len(b_shape) else (b_shape, a_shape)
    if len(short) == len(long_) or long_[len(long_) - len(short):] != short:
        raise ShapeMismatchError(f"{op}: shapes {a_shape} and {b_shape} are not broadcastable")


def _reduce_to(grad: np.ndarray, shape: tuple) -> np.ndarray:
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    return grad


# ---------------------------------------------------------------------------
# Elementwise
# ---------------------------------------------------------------------------


def add(a, b) -> Tensor:
    """Elementwise sum with trailing broadcast."""
    a, b = as_tensor(a), as_tensor(b)
    _check_trailing(a.shape, b.shape, "add")

    def backward(grad):
        return _reduce_to(grad, a.shape), _reduce_to(grad, b.shape)

    return record("add", a.data + b.data, (a, b), backward)


def sub(a, b) -> Tensor:
    """Elementwise difference with trailing broadcast."""
    a, b = as_tensor(a), as_tensor(b)
    _check_trailing(a.shape, b.shape, "sub")

    def backward(grad):
        return _reduce_to(grad, a.shape), -_reduce_to(grad, b.shape)

    return record("sub", a.data - b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    """Elementwise product with trailing broadcast."""
    a, b = as_tensor(a), as_tensor(b)
    _check_trailing(a.shape, b.shape, "mul")

    def backward(grad):
        return _reduce_to(grad * b.data, a.shape), _reduce_to(grad * a.data, b.shape)

    return record("mul", a.data * b.data, (a, b), backward)


def scalar_mul(x, scalar: float) -> Tensor:
    x = as_tensor(x)
    scalar = float(scalar)

    def backward(grad):
        return (grad * scalar,)

    return record("scalar_mul", x.data * scalar, (x,), backward)


def relu(x) -> Tensor:
    """Rectifier; the gradient at exactly zero is zero."""
    x = as_tensor(x)
    active = x.data > 0

    def backward(grad):
        return (grad * active,)

    return record("relu", np.where(active, x.data, 0).astype(x.data.dtype), (x,), backward)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    # exp of a non-positive argument only; sigmoid(0) is exactly 0.5
    z = np.exp(-np.abs(x.data))
    y = np.where(x.data >= 0, 1.0 / (1.0 + z), z / (1.0 + z)).astype(x.data.dtype)

    def backward(grad):
        return (grad * y * (1 - y),)

    return record("sigmoid", y, (x,), backward)


def dropout(x, rate: float, rng=None, training: bool = True) -> Tensor:
    """
    Inverted dropout.

    Args:
        x: Input tensor
        rate: Drop probability in [0, 1)
        rng: numpy Generator supplying the mask
        training: Identity when False

    Returns:
        Tensor
    """
    x = as_tensor(x)
    if not training or rate <= 0:
        return x
    if rate >= 1:
        raise ValueError(f"Dropout rate must be < 1, got {rate}")
    rng = rng if rng is not None else np.random.default_rng()
    keep = (rng.random(x.shape) >= rate).astype(x.data.dtype) / (1.0 - rate)

    def backward(grad):
        return (grad * keep,)

    return record("dropout", x.data * keep, (x,), backward)


# ---------------------------------------------------------------------------
# Shape and reductions
# ---------------------------------------------------------------------------


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    original = x.shape

    def backward(grad):
        return (grad.reshape(original),)

    return record("reshape", x.data.reshape(shape), (x,), backward)


def transpose(x, axes=None) -> Tensor:
    x = as_tensor(x)
    axes = tuple(range(x.ndim))[::-1] if axes is None else tuple(axes)
    inverse = tuple(np.argsort(axes))

    def backward(grad):
        return (grad.transpose(inverse),)

    return record("transpose", np.ascontiguousarray(x.data.transpose(axes)), (x,), backward)


def sum(x, axis=None, keepdims: bool = False) -> Tensor:  # pylint: disable=redefined-builtin
    x = as_tensor(x)

    def backward(grad):
        if axis is not None and not keepdims:
            grad = np.expand_dims(grad, axis)
        return (np.broadcast_to(grad, x.shape).copy(),)

    return record("sum", np.sum(x.data, axis=axis, keepdims=keepdims), (x,), backward)


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return scalar_mul(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def l2_norm(x) -> Tensor:
    """Euclidean norm of all elements; the gradient at the zero vector is zero."""
    x = as_tensor(x)
    norm = np.sqrt(np.sum(x.data * x.data))

    def backward(grad):
        if norm == 0:
            return (np.zeros_like(x.data),)
        return (grad * x.data / norm,)

    return record("l2_norm", norm, (x,), backward)


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def matmul(a, b) -> Tensor:
    """
    Matrix product; leading (batch) dimensions must be identical.

    Args:
        a: Tensor[..., M, K]
        b: Tensor[..., K, N]

    Returns:
        Tensor[..., M, N]
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatchError(f"matmul needs matrices, got {a.shape} and {b.shape}")
    if a.shape[-1] != b.shape[-2] or a.shape[:-2] != b.shape[:-2]:
        raise ShapeMismatchError(f"matmul: shapes {a.shape} and {b.shape} do not align")

    def backward(grad):
        grad_a = np.matmul(grad, np.swapaxes(b.data, -1, -2)) if a.requires_grad else None
        grad_b = np.matmul(np.swapaxes(a.data, -1, -2), grad) if b.requires_grad else None
        return grad_a, grad_b

    return record("matmul", np.matmul(a.data, b.data), (a, b), backward)


def softmax(x, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``."""
    x = as_tensor(x)
    if not -x.ndim <= axis < x.ndim:
        raise ShapeMismatchError(f"softmax axis {axis} invalid for shape {x.shape}")
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    exp = np.exp(shifted)
    y = exp / np.sum(exp, axis=axis, keepdims=True)

    def backward(grad):
        return (y * (grad - np.sum(grad * y, axis=axis, keepdims=True)),)

    return record("softmax", y, (x,), backward)


# ---------------------------------------------------------------------------
# Convolution, pooling, patches
# ---------------------------------------------------------------------------


def _pair(value) -> tuple:
    return tuple(value) if isinstance(value, (tuple, list)) else (value, value)


def _im2col(xp: np.ndarray, kernel: tuple, stride: tuple, out_hw: tuple) -> np.ndarray:
    """Gather sliding windows into (N, C*kh*kw, ho*wo), channel-major rows."""
    n, c = xp.shape[:2]
    kh, kw = kernel
    sh, sw = stride
    ho, wo = out_hw
    cols = np.empty((n, c, kh, kw, ho, wo), dtype=xp.dtype)
    for i in range(kh):
        for j in range(kw):
            cols[:, :, i, j] = xp[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw]
    return cols.reshape(n, c * kh * kw, ho * wo)


def _col2im(cols: np.ndarray, padded_shape: tuple, kernel: tuple, stride: tuple, out_hw: tuple):
    """Adjoint of ``_im2col``: scatter-add windows back onto the input grid."""
    n, c = padded_shape[:2]
    kh, kw = kernel
    sh, sw = stride
    ho, wo = out_hw
    cols = cols.reshape(n, c, kh, kw, ho, wo)
    xp = np.zeros(padded_shape, dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            xp[:, :, i : i + sh * ho : sh, j : j + sw * wo : sw] += cols[:, :, i, j]
    return xp


def conv2d(x, weight, bias=None, stride: int = 1, padding: int = 0) -> Tensor:
    """
    2D cross-correlation with zero padding.

    Args:
        x: Tensor[N, C, H, W]
        weight: Tensor[O, C, kh, kw]
        bias: Tensor[O] or None
        stride: Step between windows (>= 1)
        padding: Zeros added on every side

    Returns:
        Tensor[N, O, H', W'] with H' = (H + 2p - kh) // stride + 1
    """
    x, weight = as_tensor(x), as_tensor(weight)
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeMismatchError(f"conv2d needs 4-D input and weight, got {x.shape}, {weight.shape}")
    n, c, h, w = x.shape
    o, wc, kh, kw = weight.shape
    if wc != c:
        raise ShapeMismatchError(f"conv2d: input has {c} channels, weight expects {wc}")
    if stride < 1:
        raise ValueError(f"conv2d stride must be >= 1, got {stride}")
    if kh > h + 2 * padding or kw > w + 2 * padding:
        raise ShapeMismatchError(
            f"conv2d: kernel {kh}x{kw} exceeds padded input {h + 2 * padding}x{w + 2 * padding}"
        )
    ho = (h + 2 * padding - kh) // stride + 1
    wo = (w + 2 * padding - kw) // stride + 1

    xp = np.pad(x.data, ((0, 0), (0, 0), (padding, padding), (padding, padding))) if padding else x.data
    cols = _im2col(xp, (kh, kw), (stride, stride), (ho, wo))
    w2 = weight.data.reshape(o, -1)
    out = np.matmul(w2, cols)
    inputs = (x, weight)
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (o,):
            raise ShapeMismatchError(f"conv2d: bias shape {bias.shape} != ({o},)")
        out = out + bias.data[:, None]
        inputs = (x, weight, bias)
    out = out.reshape(n, o, ho, wo)

    def backward(grad):
        g2 = grad.reshape(n, o, ho * wo)
        grad_x = None
        if x.requires_grad:
            dcols = np.matmul(w2.T, g2)
            dxp = _col2im(dcols, xp.shape, (kh, kw), (stride, stride), (ho, wo))
            grad_x = dxp[:, :, padding : padding + h, padding : padding + w]
        grad_w = None
        if weight.requires_grad:
            grad_w = np.matmul(g2, np.swapaxes(cols, 1, 2)).sum(axis=0).reshape(weight.shape)
        grads = (grad_x, grad_w)
        if bias is not None:
            grads += (g2.sum(axis=(0, 2)) if bias.requires_grad else None,)
        return grads

    return record("conv2d", out, inputs, backward)


def max_pool2d(x) -> Tensor:
    """2x2 max pooling with stride 2; ties resolve to the first window element."""
    x = as_tensor(x)
    n, c, h, w = x.shape
    if h % 2 or w % 2:
        raise DimensionError(f"max_pool2d needs even spatial size, got {h}x{w}")
    windows = x.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(n, c, h // 2, w // 2, 4)
    index = np.argmax(windows, axis=-1)[..., None]
    out = np.take_along_axis(windows, index, axis=-1)[..., 0]

    def backward(grad):
        scattered = np.zeros(windows.shape, dtype=grad.dtype)
        np.put_along_axis(scattered, index, grad[..., None], axis=-1)
        scattered = scattered.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return (scattered.reshape(n, c, h, w),)

    return record("max_pool2d", out, (x,), backward)


def unfold(x, kernel, stride) -> Tensor:
    """
    Extract sliding patches.

    Args:
        x: Tensor[N, C, H, W]
        kernel: (kh, kw)
        stride: (sh, sw)

    Returns:
        Tensor[N, C*kh*kw, L] with L the number of windows
    """
    x = as_tensor(x)
    n, c, h, w = x.shape
    kh, kw = _pair(kernel)
    sh, sw = _pair(stride)
    if kh > h or kw > w:
        raise ShapeMismatchError(f"unfold: kernel {kh}x{kw} exceeds input {h}x{w}")
    ho = (h - kh) // sh + 1
    wo = (w - kw) // sw + 1
    cols = _im2col(x.data, (kh, kw), (sh, sw), (ho, wo))

    def backward(grad):
        return (_col2im(grad, x.shape, (kh, kw), (sh, sw), (ho, wo)),)

    return record("unfold", cols, (x,), backward)


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _upsample_plan(size: int, dtype):
    dst = np.arange(2 * size)
    src = np.maximum((dst + 0.5) / 2.0 - 0.5, 0.0)
    lo = np.floor(src).astype(np.int64)
    hi = np.minimum(lo + 1, size - 1)
    frac = (src - lo).astype(dtype)
    matrix = np.zeros((2 * size, size), dtype=dtype)
    np.add.at(matrix, (dst, lo), 1 - frac)
    np.add.at(matrix, (dst, hi), frac)
    return lo, hi, frac, matrix


def bilinear_upsample2x(x) -> Tensor:
    """Bilinear x2 upsampling with half-pixel centers (align_corners=False)."""
    x = as_tensor(x)
    _, _, h, w = x.shape
    lo_h, hi_h, frac_h, mat_h = _upsample_plan(h, x.data.dtype)
    lo_w, hi_w, frac_w, mat_w = _upsample_plan(w, x.data.dtype)

    # a + t * (b - a) keeps constants exact
    top, bottom = x.data[:, :, lo_h, :], x.data[:, :, hi_h, :]
    rows = top + frac_h[:, None] * (bottom - top)
    left, right = rows[..., lo_w], rows[..., hi_w]
    out = left + frac_w * (right - left)

    def backward(grad):
        return (np.matmul(np.matmul(mat_h.T, grad), mat_w),)

    return record("bilinear_upsample2x", out, (x,), backward)


# ---------------------------------------------------------------------------
# Normalization statistics
# ---------------------------------------------------------------------------

_CHANNEL_AXES = (0, 2, 3)


def channel_mean(x) -> Tensor:
    x = as_tensor(x)
    count = x.shape[0] * x.shape[2] * x.shape[3]

    def backward(grad):
        return (np.broadcast_to(grad[None, :, None, None] / count, x.shape).copy(),)

    return record("channel_mean", x.data.mean(axis=_CHANNEL_AXES), (x,), backward)


def channel_std(x, eps: float = NORM_EPS) -> Tensor:
    x = as_tensor(x)
    count = x.shape[0] * x.shape[2] * x.shape[3]
    centered = x.data - x.data.mean(axis=_CHANNEL_AXES, keepdims=True)
    std = np.sqrt((centered * centered).mean(axis=_CHANNEL_AXES) + eps)

    def backward(grad):
        return ((grad / std)[None, :, None, None] * centered / count,)

    return record("channel_std", std, (x,), backward)


def channel_stats(x, eps: float = NORM_EPS):
    """
    Per-channel mean and standard deviation over batch and spatial axes.

    Args:
        x: Tensor[N, C, H, W]
        eps: Added to the population variance before the square root

    Returns:
        (mean: Tensor[C], std: Tensor[C])
    """
    x = as_tensor(x)
    if x.ndim != 4:
        raise ShapeMismatchError(f"channel_stats needs a 4-D tensor, got {x.shape}")
    if x.shape[0] * x.shape[2] * x.shape[3] < 1:
        raise DimensionError("channel_stats needs at least one sample per channel")
    return channel_mean(x), channel_std(x, eps)


def normalize(x, axis: int = -1, eps: float = NORM_EPS) -> Tensor:
    """Zero-mean, unit-variance along ``axis`` (population variance + eps)."""
    x = as_tensor(x)
    centered = x.data - x.data.mean(axis=axis, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=axis, keepdims=True) + eps)
    xhat = centered * inv_std

    def backward(grad):
        g_mean = grad.mean(axis=axis, keepdims=True)
        gx_mean = (grad * xhat).mean(axis=axis, keepdims=True)
        return (inv_std * (grad - g_mean - xhat * gx_mean),)

    return record("normalize", xhat, (x,), backward)


def layer_norm(x, axis: int = -1, gain=None, offset=None, eps: float = NORM_EPS) -> Tensor:
    """
    Layer normalization followed by an optional affine map.

    Args:
        x: Input tensor
        axis: Normalized axis
        gain: Optional scale, broadcast over trailing dimensions
        offset: Optional shift, broadcast over trailing dimensions

    Returns:
        Tensor shaped like ``x``
    """
    y = normalize(x, axis=axis, eps=eps)
    if gain is not None:
        y = mul(y, gain)
    if offset is not None:
        y = add(y, offset)
    return y
