"""
Tests for the tensor core and its gradients
"""
import numpy as np
import pytest

from style_transformer.errors import DimensionError, ShapeMismatchError
from style_transformer.tensor import Tensor, backward, grad_check, no_grad, ops, precision

SEEDS = (0, 1, 2, 3, 4)


def _weighted_sum(y, seed=99):
    """Scalar readout with fixed random weights so no gradient is trivially uniform."""
    weights = np.random.default_rng(seed).standard_normal(y.shape)
    return ops.sum(ops.mul(y, weights))


def _away_from_zero(rng, shape, margin=0.1):
    values = rng.standard_normal(shape)
    return np.where(np.abs(values) < margin, np.sign(values + 1e-12) * (margin + 0.05), values)


def test_conv2d_output_shape():
    """Test stride-2, padding-1 convolution shape arithmetic."""
    rng = np.random.default_rng(0)
    out = ops.conv2d(Tensor(rng.standard_normal((2, 4, 8, 8))), Tensor(rng.standard_normal((6, 4, 3, 3))), stride=2, padding=1)
    assert out.shape == (2, 6, 4, 4)


def test_conv2d_rejects_channel_mismatch():
    """Test conv2d error on mismatched channels."""
    with pytest.raises(ShapeMismatchError):
        ops.conv2d(Tensor(np.zeros((1, 3, 4, 4))), Tensor(np.zeros((2, 4, 3, 3))))


def test_matmul_rejects_misaligned_shapes():
    """Test matmul error on inner-dimension mismatch."""
    with pytest.raises(ShapeMismatchError):
        ops.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((4, 5))))


def test_add_rejects_leading_broadcast():
    """Test that only trailing broadcast is allowed."""
    with pytest.raises(ShapeMismatchError):
        ops.add(Tensor(np.zeros((3, 4))), Tensor(np.zeros((3, 1))))


@pytest.mark.parametrize("seed", SEEDS)
def test_softmax_rows_sum_to_one(seed):
    """Test softmax normalization, including large logits."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((3, 5)) * 10.0
    y = ops.softmax(Tensor(x)).numpy()
    np.testing.assert_allclose(y.sum(axis=-1), 1.0, atol=1e-6)
    assert np.all(y > 0) and np.all(y <= 1)


def test_channel_stats_constant_channel():
    """Test zero-variance channel: std is sqrt(eps)."""
    mean, std = ops.channel_stats(Tensor(np.full((1, 2, 3, 3), 2.0)))
    np.testing.assert_allclose(mean.numpy(), [2.0, 2.0], atol=1e-6)
    np.testing.assert_allclose(std.numpy(), [np.sqrt(1e-5)] * 2, rtol=1e-4)


def test_max_pool2d_requires_even_size():
    """Test max-pool dimension error."""
    with pytest.raises(DimensionError):
        ops.max_pool2d(Tensor(np.zeros((1, 1, 3, 4))))


def test_bilinear_preserves_constants():
    """Test that upsampling a constant map is exact."""
    out = ops.bilinear_upsample2x(Tensor(np.full((1, 2, 3, 5), 0.7)))
    assert out.shape == (1, 2, 6, 10)
    np.testing.assert_array_equal(out.numpy(), np.float32(0.7))


def test_unfold_window_count():
    """Test unfold output layout (N, C*kh*kw, L)."""
    out = ops.unfold(Tensor(np.zeros((1, 3, 8, 8))), (4, 4), (2, 2))
    assert out.shape == (1, 48, 9)


def test_unfold_rejects_large_kernel():
    """Test unfold kernel-exceeds-input error."""
    with pytest.raises(ShapeMismatchError):
        ops.unfold(Tensor(np.zeros((1, 1, 4, 4))), (5, 1), (1, 1))


def test_backward_accumulates_shared_input():
    """Test gradient accumulation when a tensor is used twice."""
    x = Tensor(np.array([1.0, -2.0, 3.0]), requires_grad=True)
    loss = ops.sum(ops.mul(x, x))
    backward(loss)
    np.testing.assert_allclose(x.grad, [2.0, -4.0, 6.0])


def test_backward_targets_restrict_leaves():
    """Test that only requested leaves receive gradients."""
    a = Tensor(np.ones(3), requires_grad=True)
    b = Tensor(np.ones(3), requires_grad=True)
    backward(ops.sum(ops.mul(a, b)), targets=[a])
    assert a.grad is not None
    assert b.grad is None


def test_no_grad_records_nothing():
    """Test that no_grad disables the tape."""
    x = Tensor(np.ones(3), requires_grad=True)
    with no_grad():
        y = ops.relu(x)
    assert y.node is None
    assert not y.requires_grad


def test_precision_context_restores_dtype():
    """Test float64 context scope."""
    with precision("float64"):
        assert Tensor([1.0]).data.dtype == np.float64
    assert Tensor([1.0]).data.dtype == np.float32


def test_grad_check_linear_sum_is_exact():
    """Test grad_check on sum (exact linear gradient)."""
    x = Tensor(np.random.default_rng(0).standard_normal((4, 5)))
    assert grad_check(ops.sum, x) < 1e-6


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_softmax(seed):
    """Test softmax adjoint."""
    x = Tensor(np.random.default_rng(seed).standard_normal((3, 5)))
    assert grad_check(lambda t: _weighted_sum(ops.softmax(t)), x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_conv2d_weight(seed):
    """Test conv2d adjoint with respect to the weight."""
    rng = np.random.default_rng(seed)
    image = rng.standard_normal((2, 4, 8, 8))
    w = Tensor(rng.standard_normal((6, 4, 3, 3)) * 0.3)
    assert grad_check(lambda t: ops.sum(ops.conv2d(image, t, stride=2, padding=1)), w) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_conv2d_input_and_bias(seed):
    """Test conv2d adjoint with respect to input and bias."""
    rng = np.random.default_rng(seed)
    weight = rng.standard_normal((3, 2, 3, 3)) * 0.3
    bias = rng.standard_normal(3)
    x = Tensor(rng.standard_normal((1, 2, 6, 6)))
    assert grad_check(lambda t: _weighted_sum(ops.conv2d(t, weight, bias, stride=1, padding=1)), x) < 1e-3
    b = Tensor(bias)
    image = x.data
    assert grad_check(lambda t: _weighted_sum(ops.conv2d(image, weight, t, padding=1)), b) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_conv_relu_sum_pipeline(seed):
    """Test composite conv -> relu -> sum."""
    rng = np.random.default_rng(seed)
    weight = rng.standard_normal((3, 2, 3, 3)) * 0.3
    x = Tensor(rng.standard_normal((1, 2, 6, 6)))
    assert grad_check(lambda t: ops.sum(ops.relu(ops.conv2d(t, weight, padding=1))), x, eps=1e-6) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_elementwise(seed):
    """Test add, sub, mul, scalar_mul, relu and sigmoid adjoints."""
    rng = np.random.default_rng(seed)
    other = rng.standard_normal((3, 4))
    row = rng.standard_normal(4)
    x = Tensor(_away_from_zero(rng, (3, 4)))

    def f(t):
        y = ops.add(ops.mul(t, other), row)
        y = ops.sub(ops.scalar_mul(y, 1.5), ops.relu(t))
        return _weighted_sum(ops.sigmoid(y))

    assert grad_check(f, x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_matmul_transpose_reshape(seed):
    """Test matmul, transpose and reshape adjoints."""
    rng = np.random.default_rng(seed)
    right = rng.standard_normal((2, 5, 3))
    x = Tensor(rng.standard_normal((2, 4, 5)))

    def f(t):
        y = ops.matmul(t, right)
        y = ops.transpose(y, (0, 2, 1))
        return _weighted_sum(ops.reshape(y, (6, 4)))

    assert grad_check(f, x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_mean_and_l2_norm(seed):
    """Test mean and l2_norm adjoints."""
    x = Tensor(np.random.default_rng(seed).standard_normal((4, 6)))
    assert grad_check(lambda t: ops.l2_norm(ops.mean(t, axis=0)), x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_max_pool(seed):
    """Test max-pool adjoint on tie-free input."""
    rng = np.random.default_rng(seed)
    x = Tensor(rng.permutation(32).reshape(1, 2, 4, 4) * 0.1)
    assert grad_check(lambda t: _weighted_sum(ops.max_pool2d(t)), x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_unfold(seed):
    """Test unfold adjoint with overlapping windows."""
    x = Tensor(np.random.default_rng(seed).standard_normal((1, 2, 5, 5)))
    assert grad_check(lambda t: _weighted_sum(ops.unfold(t, (3, 2), (1, 2))), x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_bilinear(seed):
    """Test bilinear upsample adjoint."""
    x = Tensor(np.random.default_rng(seed).standard_normal((1, 2, 3, 4)))
    assert grad_check(lambda t: _weighted_sum(ops.bilinear_upsample2x(t)), x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_channel_stats(seed):
    """Test channel mean and std adjoints."""
    x = Tensor(np.random.default_rng(seed).standard_normal((1, 3, 4, 4)))

    def f(t):
        mean, std = ops.channel_stats(t)
        return ops.add(_weighted_sum(mean, 1), _weighted_sum(std, 2))

    assert grad_check(f, x) < 1e-3


@pytest.mark.parametrize("seed", SEEDS)
def test_grad_check_layer_norm(seed):
    """Test layer norm adjoint with gain and offset."""
    rng = np.random.default_rng(seed)
    gain = 1.0 + 0.1 * rng.standard_normal(6)
    offset = rng.standard_normal(6)
    x = Tensor(rng.standard_normal((4, 6)))
    assert grad_check(lambda t: _weighted_sum(ops.layer_norm(t, gain=gain, offset=offset)), x) < 1e-3


def test_dropout_identity_when_not_training():
    """Test dropout is the identity in eval mode."""
    x = Tensor(np.ones((4, 4)))
    assert ops.dropout(x, 0.5, np.random.default_rng(0), training=False) is x
