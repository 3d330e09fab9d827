"""
Tests for the Adam optimizer
"""
import numpy as np
import pytest

from style_transformer.errors import MissingGradientError
from style_transformer.model import Linear
from style_transformer.tensor import Tensor, backward, ops
from style_transformer.trainer import Adam, AdamState, adam_step


def test_zero_gradient_leaves_parameters():
    """Test the null update."""
    param = Tensor(np.array([1.5, -2.0]))
    state = AdamState.for_params([param])
    adam_step([param], [np.zeros(2)], state, lr=0.1)
    np.testing.assert_array_equal(param.data, [1.5, -2.0])
    assert state.step == 1


def test_moments_decay_with_zero_gradient():
    """Test that moments shrink toward zero when the gradient vanishes."""
    param = Tensor(np.zeros(1))
    state = AdamState.for_params([param])
    adam_step([param], [np.ones(1)], state, lr=0.1)
    first, second = state.first[0].copy(), state.second[0].copy()
    adam_step([param], [np.zeros(1)], state, lr=0.1)
    assert abs(state.first[0][0]) < abs(first[0])
    assert abs(state.second[0][0]) < abs(second[0])


def test_first_step_moves_by_learning_rate():
    """Test bias correction: the first update has magnitude lr."""
    param = Tensor(np.array([0.0]))
    state = AdamState.for_params([param])
    adam_step([param], [np.array([3.0])], state, lr=0.01)
    assert param.data[0] == pytest.approx(-0.01, rel=1e-5)


def test_scalar_recurrence():
    """Test three steps with constant gradient 1 against the hand recurrence."""
    param = Tensor(np.array([0.0]))
    state = AdamState.for_params([param])
    m = v = value = 0.0
    for step in range(1, 4):
        adam_step([param], [np.array([1.0])], state, lr=0.1)
        m = 0.9 * m + 0.1
        v = 0.999 * v + 0.001
        value -= 0.1 * (m / (1 - 0.9 ** step)) / (np.sqrt(v / (1 - 0.999 ** step)) + 1e-8)
        assert param.data[0] == pytest.approx(value, abs=1e-6)


def test_moment_shapes_mirror_parameters():
    """Test moment buffer shapes."""
    params = [Tensor(np.zeros((2, 3))), Tensor(np.zeros(4))]
    state = AdamState.for_params(params)
    assert [m.shape for m in state.first] == [(2, 3), (4,)]
    assert [v.shape for v in state.second] == [(2, 3), (4,)]


def test_missing_gradient_updates_nothing():
    """Test that a missing gradient fails before any parameter changes."""
    a = Tensor(np.ones(2), requires_grad=True)
    b = Tensor(np.ones(2), requires_grad=True)
    a.grad = np.ones(2)
    optimizer = Adam([("a", a), ("b", b)], lr=0.1)
    with pytest.raises(MissingGradientError, match="b"):
        optimizer.step()
    np.testing.assert_array_equal(a.data, 1.0)
    assert optimizer.state.step == 0


def test_step_clears_gradients():
    """Test gradients are zeroed after the update."""
    layer = Linear(3, 2, np.random.default_rng(0))
    optimizer = Adam(layer.named_parameters(), lr=0.01)
    x = Tensor(np.random.default_rng(1).standard_normal((4, 3)))
    backward(ops.sum(layer(x)))
    optimizer.step()
    assert all(p.grad is None for p in layer.parameters())


def test_two_steps_are_reproducible():
    """Test bitwise determinism of a fixed-seed two-step run."""

    def run():
        layer = Linear(3, 2, np.random.default_rng(5))
        optimizer = Adam(layer.named_parameters(), lr=0.01)
        x = Tensor(np.random.default_rng(6).standard_normal((4, 3)))
        for _ in range(2):
            backward(ops.sum(ops.mul(layer(x), layer(x))))
            optimizer.step()
        return layer.state_dict()

    first, second = run(), run()
    for name in first:
        np.testing.assert_array_equal(first[name], second[name])


def test_learning_rate_must_be_positive():
    """Test optimizer argument validation."""
    with pytest.raises(ValueError):
        Adam([("w", Tensor(np.zeros(1)))], lr=0.0)
