"""
Tests for the loss network, content/style losses and their total
"""
import numpy as np
import pytest

from style_transformer.errors import CheckpointShapeError, ConfigError, DimensionError, ShapeMismatchError
from style_transformer.loss import (
    LossConfig,
    LossNetwork,
    content_loss,
    loss_features,
    style_loss,
    total_loss,
)
from style_transformer.model import ModelConfig
from style_transformer.tensor import Tensor, backward, grad_check, no_grad, precision
from style_transformer.trainer import TrainConfig, Trainer, save_checkpoint


@pytest.fixture(scope="module")
def net():
    return LossNetwork(width_factor=0.25, seed=0)


def _image(size, seed):
    return Tensor(np.random.default_rng(seed).random((1, 3, size, size)))


def test_tap_shapes(net):
    """Test tap strides and widths at 64x64."""
    with no_grad():
        features = loss_features(_image(64, 0), net)
    assert [f.shape for f in features] == [
        (1, 16, 64, 64),
        (1, 32, 32, 32),
        (1, 64, 16, 16),
        (1, 128, 8, 8),
    ]
    assert [net.tap_channels(t) for t in (1, 2, 3, 4)] == [16, 32, 64, 128]


def test_partial_taps_build_fewer_blocks():
    """Test that blocks past the deepest tap are not built."""
    shallow = LossNetwork(width_factor=0.25, tap_layers=(1, 2))
    assert len(shallow.blocks) == 2
    with no_grad():
        assert len(shallow(_image(16, 0))) == 2


def test_weights_are_frozen(net):
    """Test that no gradient reaches the loss network."""
    assert all(not p.requires_grad for p in net.parameters())
    output = Tensor(np.random.default_rng(1).random((1, 3, 16, 16)), requires_grad=True)
    breakdown = total_loss(_image(16, 2), _image(16, 3), output, 10.0, net)
    backward(breakdown.total)
    assert output.grad is not None
    assert all(p.grad is None for p in net.parameters())


def test_features_are_deterministic(net):
    """Test bitwise-identical features for identical inputs."""
    with no_grad():
        first = [f.numpy().copy() for f in net(_image(32, 4))]
        second = [f.numpy() for f in net(_image(32, 4))]
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a, b)


def test_single_pixel_reaches_deepest_tap(net):
    """Test receptive-field connectivity of f4."""
    image = _image(32, 5)
    shifted = Tensor(image.numpy().copy())
    shifted.data[0, :, 13, 17] += 0.5
    with no_grad():
        before = net(image)[-1].numpy()
        after = net(shifted)[-1].numpy()
    assert not np.array_equal(before, after)


def test_loss_network_size_check(net):
    """Test dimension error for sides not divisible by 8."""
    with pytest.raises(DimensionError):
        net(_image(20, 0))


def test_content_loss_identity(net):
    """Test content_loss(I, I) == 0 exactly."""
    image = _image(32, 6)
    assert content_loss(image, image, net).item() == 0.0


def test_content_loss_size_mismatch(net):
    """Test error for differently sized images."""
    with pytest.raises(ShapeMismatchError):
        content_loss(_image(32, 0), _image(16, 0), net)


def test_content_loss_matches_float64_recomputation(net):
    """Test content loss against a 64-bit recomputation from the same features."""
    content, output = _image(64, 7), _image(64, 8)
    with no_grad():
        value = content_loss(content, output, net).item()
        target = net(content)[-1].numpy().astype(np.float64)
        produced = net(output)[-1].numpy().astype(np.float64)
    assert value >= 0
    assert value == pytest.approx(np.mean((produced - target) ** 2), rel=1e-5, abs=1e-7)


def test_style_loss_identity_on_random_images(net):
    """Test style_loss(I, I) <= 1e-6 and content_loss(I, I) == 0 for ten images."""
    for seed in range(10):
        image = _image(16, 100 + seed)
        total, per_layer = style_loss(image, image, net)
        assert total.item() <= 1e-6
        assert len(per_layer) == 4
        assert content_loss(image, image, net).item() == 0.0


def test_style_loss_equal_constant_images(net):
    """Test that two equal constant images have identical statistics."""
    a = Tensor(np.full((1, 3, 16, 16), 0.3))
    b = Tensor(np.full((1, 3, 16, 16), 0.3))
    total, _ = style_loss(a, b, net)
    assert total.item() <= 1e-6


def test_total_loss_lambda_zero(net):
    """Test that lambda 0 leaves only the content term."""
    breakdown = total_loss(_image(16, 1), _image(16, 2), _image(16, 3), 0.0, net)
    assert breakdown.total.item() == breakdown.content.item()


def test_total_loss_is_content_plus_weighted_style(net):
    """Test total == content + 10 * style as computed in float32."""
    breakdown = total_loss(_image(16, 1), _image(16, 2), _image(16, 3), 10.0, net)
    c, s = breakdown.content.item(), breakdown.style.item()
    assert c >= 0 and s >= 0
    assert breakdown.total.item() == float(np.float32(c) + np.float32(s) * np.float32(10.0))
    record = breakdown.as_record()
    assert set(record) == {"content", "style", "total"}


def test_total_loss_linear_and_increasing_in_lambda(net):
    """Test linearity and monotonicity in lambda."""
    images = (_image(16, 4), _image(16, 5), _image(16, 6))
    totals = {lam: total_loss(*images, lam, net) for lam in (1.0, 2.5, 3.5)}
    content = totals[1.0].content.item()
    combined = totals[1.0].total.item() + totals[2.5].total.item() - content
    assert combined == pytest.approx(totals[3.5].total.item(), rel=1e-5)
    assert totals[1.0].total.item() < totals[2.5].total.item() < totals[3.5].total.item()


def test_total_loss_rejects_negative_lambda(net):
    """Test lambda validation."""
    with pytest.raises(ValueError):
        total_loss(_image(16, 1), _image(16, 2), _image(16, 3), -1.0, net)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_total_loss_gradient_wrt_output(seed):
    """Test d(total)/d(output) against finite differences at 16x16."""
    with precision("float64"):
        net = LossNetwork(width_factor=0.25, seed=seed)
    rng = np.random.default_rng(seed)
    content = rng.random((1, 3, 16, 16))
    style = rng.random((1, 3, 16, 16))
    output = Tensor(rng.random((1, 3, 16, 16)))
    indices = rng.choice(output.size, size=12, replace=False).tolist()

    def f(t):
        return total_loss(Tensor(content), Tensor(style), t, 10.0, net).total

    assert grad_check(f, output, eps=1e-5, indices=indices) < 1e-3


def test_load_weights_from_checkpoint(tmp_path):
    """Test replacing random loss-network weights with a weight file."""
    donor = LossNetwork(width_factor=0.25, seed=7)
    path = tmp_path / "vgg.sttr"
    save_checkpoint(path, donor.state_dict())
    loaded = LossNetwork.from_config(LossConfig(loss_net=str(path), seed=0))
    assert loaded.source.startswith("loaded(")
    for name, value in donor.state_dict().items():
        np.testing.assert_array_equal(loaded.state_dict()[name], value)
    assert all(not p.requires_grad for p in loaded.parameters())


def test_load_weights_shape_mismatch(tmp_path):
    """Test that a wrong-width weight file is rejected."""
    path = tmp_path / "vgg.sttr"
    save_checkpoint(path, LossNetwork(width_factor=0.5).state_dict())
    with pytest.raises(CheckpointShapeError):
        LossNetwork.from_config(LossConfig(loss_net=str(path), width_factor=0.25))


def test_loss_config_validation():
    """Test tap and width validation."""
    with pytest.raises(ConfigError):
        LossConfig(tap_layers=(2, 1)).validate()
    with pytest.raises(ConfigError):
        LossConfig(tap_layers=(5,)).validate()
    with pytest.raises(ConfigError):
        LossConfig(width_factor=0).validate()


@pytest.mark.slow
def test_loss_network_unchanged_by_training():
    """Test loss-network weights stay bitwise identical over 100 steps."""
    trainer = Trainer(
        ModelConfig(d=16, heads=2, encoder_layers=1, decoder_layers=1),
        TrainConfig(steps=100, image_size=32),
    )
    before = trainer.loss_net.state_dict()
    content, style = _image(32, 1), _image(32, 2)
    for _ in range(100):
        trainer.step(content, style)
    after = trainer.loss_net.state_dict()
    for name, value in before.items():
        np.testing.assert_array_equal(after[name], value)
