"""
Tests for attention, the style encoder, the decoder and attention capture
"""
import numpy as np
import pytest

from style_transformer.errors import AttentionIndexError, ShapeMismatchError
from style_transformer.model import (
    AttentionRecorder,
    ModelConfig,
    MultiHeadAttention,
    StyleEncoder,
    StyleTransformer,
    TokenDecoder,
    TokenSequence,
    TransformerConfig,
    attention,
    capture_attention,
    decode,
    encode_style,
    stylize,
)
from style_transformer.tensor import Tensor, grad_check, ops, precision

D = 16
CFG = TransformerConfig(d=D, heads=4, encoder_layers=2, decoder_layers=2)


def _tokens(length, seed, grid=None):
    rng = np.random.default_rng(seed)
    grid = grid or (1, length)
    return TokenSequence(Tensor(rng.standard_normal((length, D))), *grid)


def _zeros(length):
    return Tensor(np.zeros((length, D)))


def _encoder(seed=0):
    return StyleEncoder(CFG, np.random.default_rng(seed))


def _decoder(seed=0):
    return TokenDecoder(CFG, np.random.default_rng(seed))


def test_attention_single_key_returns_value_row():
    """Test that a singleton key gives its value row exactly."""
    rng = np.random.default_rng(0)
    v = Tensor(rng.standard_normal((1, 8)))
    out = attention(Tensor(rng.standard_normal((3, 8))), Tensor(rng.standard_normal((1, 8))), v)
    np.testing.assert_array_equal(out.numpy(), np.repeat(v.numpy(), 3, axis=0))


def test_attention_zero_logits_average_values():
    """Test that orthogonal queries attend uniformly."""
    rng = np.random.default_rng(1)
    v = rng.standard_normal((5, 8))
    out = attention(Tensor(np.zeros((2, 8))), Tensor(rng.standard_normal((5, 8))), Tensor(v))
    np.testing.assert_allclose(out.numpy(), np.repeat(v.mean(axis=0, keepdims=True), 2, axis=0), atol=1e-6)


def test_attention_shape_mismatch():
    """Test key/value length mismatch error."""
    with pytest.raises(ShapeMismatchError):
        attention(Tensor(np.zeros((2, 4))), Tensor(np.zeros((3, 4))), Tensor(np.zeros((2, 4))))


def test_multi_head_weights_are_distributions():
    """Test per-head weight rows are non-negative and sum to one."""
    mha = MultiHeadAttention(D, 4, np.random.default_rng(0))
    q = Tensor(np.random.default_rng(1).standard_normal((3, D)))
    kv = Tensor(np.random.default_rng(2).standard_normal((7, D)))
    out, weights = mha(q, kv, kv)
    assert out.shape == (3, D)
    assert weights.shape == (4, 3, 7)
    assert np.all(weights >= 0)
    np.testing.assert_allclose(weights.sum(axis=-1), 1.0, atol=1e-6)


def test_encoder_single_token():
    """Test that a one-token style sequence is encoded."""
    codes = encode_style(_tokens(1, 0), _zeros(1), _encoder())
    assert codes.tokens.shape == (1, D)
    assert np.all(np.isfinite(codes.tokens.numpy()))


def test_encoder_pos_shape_mismatch():
    """Test encoder rejects positional encodings of the wrong shape."""
    with pytest.raises(ShapeMismatchError):
        encode_style(_tokens(4, 0), _zeros(3), _encoder())


def test_encoder_set_equivariance_without_positions():
    """Test that permuting style tokens permutes the codes."""
    encoder = _encoder()
    style = _tokens(6, 3)
    perm = np.random.default_rng(4).permutation(6)
    permuted = TokenSequence(Tensor(style.tokens.numpy()[perm]), 1, 6)
    base = encode_style(style, _zeros(6), encoder).tokens.numpy()
    moved = encode_style(permuted, _zeros(6), encoder).tokens.numpy()
    np.testing.assert_allclose(moved, base[perm], atol=1e-5)


def test_encoder_joint_permutation_equivariance():
    """Test permuting tokens together with their positions."""
    encoder = _encoder(1)
    style = _tokens(6, 5, grid=(2, 3))
    pos = np.random.default_rng(6).standard_normal((6, D))
    perm = np.random.default_rng(7).permutation(6)
    base = encode_style(style, Tensor(pos), encoder).tokens.numpy()
    moved = encode_style(
        TokenSequence(Tensor(style.tokens.numpy()[perm]), 2, 3), Tensor(pos[perm]), encoder
    ).tokens.numpy()
    np.testing.assert_allclose(moved, base[perm], atol=1e-5)


def test_decoder_output_shape():
    """Test decoded tokens keep the content shape and grid."""
    content = _tokens(6, 0, grid=(2, 3))
    out = decode(content, _tokens(4, 1), _zeros(6), _zeros(4), _decoder())
    assert out.tokens.shape == (6, D)
    assert (out.grid_h, out.grid_w) == (2, 3)


@pytest.mark.parametrize("content_len", [1, 2, 4, 16])
@pytest.mark.parametrize("style_len", [1, 2, 4, 16])
def test_decoder_shape_over_lengths(content_len, style_len):
    """Test output length follows the content for every content/style length pair."""
    out = decode(
        _tokens(content_len, 0), _tokens(style_len, 1), _zeros(content_len), _zeros(style_len), _decoder()
    )
    assert out.tokens.shape == (content_len, D)
    assert np.all(np.isfinite(out.tokens.numpy()))


def test_attention_scales_logits_by_head_width():
    """Test zero-padding the head width from dh to 2dh divides the logits by sqrt(2)."""
    rng = np.random.default_rng(8)
    q, k, v = rng.standard_normal((3, 4)), rng.standard_normal((5, 4)), rng.standard_normal((5, 4))
    pad = np.zeros((3, 4)), np.zeros((5, 4))
    with precision("float64"):
        _, weights = attention(
            Tensor(np.hstack([q, pad[0]])), Tensor(np.hstack([k, pad[1]])), Tensor(v), return_weights=True
        )
    logits = q @ k.T / np.sqrt(4) / np.sqrt(2)
    expected = np.exp(logits - logits.max(axis=-1, keepdims=True))
    expected /= expected.sum(axis=-1, keepdims=True)
    np.testing.assert_allclose(weights.numpy(), expected, rtol=1e-10, atol=1e-12)


def test_decoder_width_mismatch():
    """Test decoder error on differing token widths."""
    style = TokenSequence(Tensor(np.zeros((4, 8))), 2, 2)
    with pytest.raises(ShapeMismatchError):
        decode(_tokens(4, 0), style, _zeros(4), Tensor(np.zeros((4, 8))), _decoder())


def test_decoder_invariant_to_style_order():
    """Test that cross-attention treats style codes as a set."""
    decoder = _decoder(2)
    content = _tokens(5, 0)
    pos_c = Tensor(np.random.default_rng(1).standard_normal((5, D)))
    style = _tokens(7, 2)
    perm = np.random.default_rng(3).permutation(7)
    shuffled = TokenSequence(Tensor(style.tokens.numpy()[perm]), 1, 7)
    base = decode(content, style, pos_c, _zeros(7), decoder).tokens.numpy()
    moved = decode(content, shuffled, pos_c, _zeros(7), decoder).tokens.numpy()
    np.testing.assert_allclose(moved, base, atol=1e-5)


def test_single_style_code_collapses_cross_attention():
    """Test that a singleton style sequence gets all the attention."""
    recorder = AttentionRecorder()
    decode(_tokens(4, 0, grid=(2, 2)), _tokens(1, 1), _zeros(4), _zeros(1), _decoder(), recorder)
    for layer in range(CFG.decoder_layers):
        for query in range(4):
            attention_map = capture_attention(recorder, "dec", layer, query)
            np.testing.assert_array_equal(attention_map.weights, [1.0])
            assert attention_map.as_grid().shape == (1, 1)


def test_duplicated_style_codes_get_equal_weight():
    """Test symmetry under duplicated keys."""
    rng = np.random.default_rng(8)
    rows = rng.standard_normal((4, D))
    rows[3] = rows[1]
    recorder = AttentionRecorder()
    style = TokenSequence(Tensor(rows), 2, 2)
    decode(_tokens(3, 9), style, _zeros(3), _zeros(4), _decoder(), recorder)
    for head in range(CFG.heads):
        weights = recorder.capture("dec", 1, 2, head).weights
        assert abs(weights[1] - weights[3]) < 1e-5


def test_captured_rows_are_distributions():
    """Test every recorded attention row in every module, layer and head."""
    recorder = AttentionRecorder()
    style = encode_style(_tokens(6, 1, grid=(2, 3)), _zeros(6), _encoder(), recorder)
    decode(_tokens(4, 2, grid=(2, 2)), style, _zeros(4), _zeros(6), _decoder(), recorder)
    expected_queries = {"enc": 6, "dec": 4, "dec_self": 4}
    for module, queries in expected_queries.items():
        assert recorder.layer_count(module) == 2
        for layer in range(2):
            for head in (-1, 0, 3):
                for query in range(queries):
                    row = recorder.capture(module, layer, query, head).weights
                    assert np.all(row >= 0)
                    assert abs(row.sum() - 1.0) < 1e-6
    assert recorder.capture("dec", 0, 0).as_grid().shape == (2, 3)


def test_capture_out_of_range():
    """Test attention index errors."""
    recorder = AttentionRecorder()
    encode_style(_tokens(4, 1), _zeros(4), _encoder(), recorder)
    with pytest.raises(AttentionIndexError):
        recorder.capture("enc", 2, 0)
    with pytest.raises(AttentionIndexError):
        recorder.capture("enc", 0, 4)
    with pytest.raises(AttentionIndexError):
        recorder.capture("enc", 0, 0, head=4)
    with pytest.raises(AttentionIndexError):
        recorder.capture("dec", 0, 0)
    with pytest.raises(AttentionIndexError):
        recorder.capture("cross", 0, 0)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_decode_gradient_through_query_weight(seed):
    """Test end-to-end gradient of the decoder output w.r.t. one query-projection entry."""
    rng = np.random.default_rng(seed)
    with precision("float64"):
        decoder = TokenDecoder(TransformerConfig(d=8, heads=2, encoder_layers=1, decoder_layers=2), rng)
        content = TokenSequence(Tensor(rng.standard_normal((4, 8))), 2, 2)
        style = TokenSequence(Tensor(rng.standard_normal((3, 8))), 1, 3)
        pos_c = Tensor(rng.standard_normal((4, 8)))
        pos_s = Tensor(rng.standard_normal((3, 8)))
    readout = np.random.default_rng(100 + seed).standard_normal((4, 8))
    layer = decoder.layers[0].cross_attention.query

    def f(weight):
        layer.weight = weight
        out = decoder(content, style, pos_c, pos_s)
        return ops.sum(ops.mul(out.tokens, readout))

    error = grad_check(f, Tensor(layer.weight.data.copy()), eps=1e-5, indices=[0, 9, 27, 63])
    assert error < 1e-3


def test_model_recorder_grids():
    """Test attention grids recorded during a full stylization."""
    cfg = ModelConfig(d=16, heads=2, encoder_layers=1, decoder_layers=1)
    model = StyleTransformer(cfg, seed=0)
    rng = np.random.default_rng(0)
    recorder = AttentionRecorder()
    out = stylize(model, Tensor(rng.random((1, 3, 64, 32))), Tensor(rng.random((1, 3, 64, 64))), recorder)
    assert out.shape == (1, 3, 64, 32)
    assert recorder.query_grid("dec") == (8, 4)
    assert recorder.query_grid("enc") == (2, 2)
    assert recorder.capture("dec", 0, 31).as_grid().shape == (2, 2)
    assert model.training
