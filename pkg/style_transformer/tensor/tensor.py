# -*- coding: utf-8 -*-
"""
Tensor: dense float array with reverse-mode automatic differentiation

Every differentiable operation records a ``Node`` on the output tensor. Nodes
carry a global sequence number taken at creation time, so sorting the nodes
reachable from a loss by that number yields a topological order (a tape).
"""
import contextlib
import itertools
import threading

import numpy as np

from ..errors import ShapeMismatchError

_SEQUENCE = itertools.count()
_STATE = threading.local()

_DTYPES = {
    "float32": np.float32,
    "float64": np.float64,
}


def is_grad_enabled() -> bool:
    """Return True when operations are being recorded for backward."""
    return getattr(_STATE, "grad_enabled", True)


def default_dtype():
    """Return the dtype new tensors are created with in this thread."""
    return getattr(_STATE, "dtype", np.float32)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference, fixed targets)."""
    previous = is_grad_enabled()
    _STATE.grad_enabled = False
    try:
        yield
    finally:
        _STATE.grad_enabled = previous


@contextlib.contextmanager
def precision(name: str):
    """
    Create tensors in the given precision inside the block.

    Args:
        name: "float32" (the default everywhere) or "float64" (gradient checks
            and reference computations only)
    """
    if name not in _DTYPES:
        raise ValueError(f"Unsupported precision: {name}. Supported: {list(_DTYPES)}")
    previous = default_dtype()
    _STATE.dtype = _DTYPES[name]
    try:
        yield
    finally:
        _STATE.dtype = previous


class Node:
    """One recorded operation: its inputs, its output and the adjoint rule."""

    __slots__ = ("seq", "op", "inputs", "output", "backward_fn")

    def __init__(self, op: str, inputs, output, backward_fn):
        self.seq = next(_SEQUENCE)
        self.op = op
        self.inputs = inputs
        self.output = output
        self.backward_fn = backward_fn

    def __repr__(self):
        return f"<Node #{self.seq} {self.op} -> {self.output.shape}>"


class Tensor:
    """N-dimensional float array with an optional gradient buffer."""

    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False):
        """
        Initialize tensor.

        Args:
            data: Array-like values (copied into the current default dtype)
            requires_grad: Whether backward should populate ``grad``
        """
        self.data = np.array(data, dtype=default_dtype())
        self.requires_grad = requires_grad
        self.grad = None
        self.node = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        """Return the underlying array (not a copy)."""
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeMismatchError(f"item() needs a single-element tensor, got {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        """Return a new leaf tensor sharing no graph history."""
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def __repr__(self):
        return (
            f"<Tensor shape={self.shape} dtype={self.data.dtype} "
            f"requires_grad={self.requires_grad}>"
        )

    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(other, self)

    def __sub__(self, other):
        return ops.sub(self, other)

    def __rsub__(self, other):
        return ops.sub(other, self)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return ops.scalar_mul(self, other)
        return ops.mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return ops.scalar_mul(self, -1.0)

    def __matmul__(self, other):
        return ops.matmul(self, other)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def relu(self) -> "Tensor":
        return ops.relu(self)

    def backward(self, targets=None):
        backward(self, targets=targets)


def as_tensor(value) -> Tensor:
    """Wrap plain numbers and arrays; pass tensors through unchanged."""
    return value if isinstance(value, Tensor) else Tensor(value)


def record(op: str, data: np.ndarray, inputs, backward_fn) -> Tensor:
    """
    Create an operation output and attach it to the tape when needed.

    Args:
        op: Operation name (for debugging)
        data: Forward result
        inputs: Input tensors, in the order ``backward_fn`` returns gradients
        backward_fn: Callable mapping the output gradient to one gradient (or
            None) per input

    Returns:
        Output tensor
    """
    out = Tensor(data)
    if is_grad_enabled() and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.node = Node(op, tuple(inputs), out, backward_fn)
    return out


class ComputeGraph:
    """Topologically ordered list of the nodes a tensor depends on."""

    def __init__(self, nodes):
        self.nodes = nodes

    @classmethod
    def from_output(cls, output: Tensor) -> "ComputeGraph":
        """Collect every node reachable from ``output``, ordered by creation."""
        seen = set()
        nodes = []
        stack = [output.node] if output.node is not None else []
        while stack:
            node = stack.pop()
            if node.seq in seen:
                continue
            seen.add(node.seq)
            nodes.append(node)
            for parent in node.inputs:
                if parent.node is not None and parent.node.seq not in seen:
                    stack.append(parent.node)
        nodes.sort(key=lambda n: n.seq)
        return cls(nodes)

    def __len__(self):
        return len(self.nodes)

    def backward(self, loss: Tensor, targets=None):
        """
        Propagate gradients from ``loss`` through the recorded nodes.

        Args:
            loss: Scalar tensor produced by the last node of this graph
            targets: Optional iterable of leaf tensors; when given, only these
                leaves receive gradients and intermediate gradients are not kept
        """
        if loss.size != 1:
            raise ShapeMismatchError(f"backward requires a scalar loss, got shape {loss.shape}")
        if not loss.requires_grad:
            return
        target_ids = None if targets is None else {id(t) for t in targets}

        pending = {}
        seed = np.ones_like(loss.data)
        if loss.node is None:
            _accumulate_leaf(loss, seed, target_ids)
            return
        pending[loss.node.seq] = seed

        for node in reversed(self.nodes):
            grad = pending.pop(node.seq, None)
            if grad is None:
                continue
            if target_ids is None:
                node.output.grad = grad
            input_grads = node.backward_fn(grad)
            for parent, parent_grad in zip(node.inputs, input_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent.node is None:
                    _accumulate_leaf(parent, parent_grad, target_ids)
                elif parent.node.seq in pending:
                    pending[parent.node.seq] = pending[parent.node.seq] + parent_grad
                else:
                    pending[parent.node.seq] = parent_grad


def _accumulate_leaf(leaf: Tensor, grad: np.ndarray, target_ids):
    if target_ids is not None and id(leaf) not in target_ids:
        return
    grad = np.asarray(grad, dtype=leaf.data.dtype).reshape(leaf.shape)
    leaf.grad = grad.copy() if leaf.grad is None else leaf.grad + grad


def backward(loss: Tensor, targets=None) -> ComputeGraph:
    """
    Run reverse-mode differentiation from a scalar loss.

    Args:
        loss: Scalar tensor
        targets: Optional leaves to restrict gradient accumulation to

    Returns:
        The graph that was traversed
    """
    graph = ComputeGraph.from_output(loss)
    graph.backward(loss, targets=targets)
    return graph


from . import ops  # noqa: E402  pylint: disable=wrong-import-position
