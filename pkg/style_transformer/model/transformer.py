# -*- coding: utf-8 -*-
"""
Transformer: multi-head attention, the style encoder and the content decoder

Layers are post-norm (sublayer -> residual add -> layer norm). Positional
encodings are added to the query and key inputs of every attention layer,
never to the values.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import AttentionIndexError, ShapeMismatchError
from ..tensor import Tensor, ops
from .config import TransformerConfig
from .module import LayerNorm, Linear, Module
from .tokenizer import TokenSequence

ATTENTION_MODULES = ("enc", "dec", "dec_self")


def _swap_last(x: Tensor) -> Tensor:
    axes = tuple(range(x.ndim - 2)) + (x.ndim - 1, x.ndim - 2)
    return ops.transpose(x, axes)


def attention(q: Tensor, k: Tensor, v: Tensor, return_weights: bool = False):
    """
    Scaled dot-product attention softmax(Q K^T / sqrt(dh)) V.

    Args:
        q: Tensor[..., Lq, dh]
        k: Tensor[..., Lk, dh]
        v: Tensor[..., Lk, dv]
        return_weights: Also return the post-softmax weights

    Returns:
        Tensor[..., Lq, dv], plus Tensor[..., Lq, Lk] when requested
    """
    if q.shape[-1] != k.shape[-1]:
        raise ShapeMismatchError(f"attention: query width {q.shape[-1]} != key width {k.shape[-1]}")
    if k.shape[-2] != v.shape[-2]:
        raise ShapeMismatchError(f"attention: {k.shape[-2]} keys but {v.shape[-2]} values")
    if q.shape[-1] < 1:
        raise ShapeMismatchError("attention: head width must be >= 1")
    logits = ops.scalar_mul(ops.matmul(q, _swap_last(k)), 1.0 / math.sqrt(q.shape[-1]))
    weights = ops.softmax(logits, axis=-1)
    out = ops.matmul(weights, v)
    return (out, weights) if return_weights else out


class MultiHeadAttention(Module):
    """Per-head projections stored as one d x d matrix per role (heads side by side)."""

    def __init__(self, d: int, heads: int, rng: np.random.Generator):
        self.query = Linear(d, d, rng)
        self.key = Linear(d, d, rng)
        self.value = Linear(d, d, rng)
        self.output = Linear(d, d, rng)
        self._heads = heads

    def _split(self, x: Tensor) -> Tensor:
        length, d = x.shape
        heads = self._heads
        return ops.transpose(ops.reshape(x, (length, heads, d // heads)), (1, 0, 2))

    def forward(self, query_in: Tensor, key_in: Tensor, value_in: Tensor):
        """
        Attend from query rows to key/value rows.

        Returns:
            (Tensor[Lq, d], np.ndarray[heads, Lq, Lk] post-softmax weights)
        """
        q = self._split(self.query(query_in))
        k = self._split(self.key(key_in))
        v = self._split(self.value(value_in))
        heads_out, weights = attention(q, k, v, return_weights=True)
        length = query_in.shape[0]
        merged = ops.reshape(ops.transpose(heads_out, (1, 0, 2)), (length, query_in.shape[1]))
        return self.output(merged), weights.data.copy()


class FeedForward(Module):
    """Two-layer ReLU MLP applied to every token."""

    def __init__(self, d: int, hidden: int, rng: np.random.Generator):
        self.expand = Linear(d, hidden, rng)
        self.contract = Linear(hidden, d, rng)

    def forward(self, x: Tensor) -> Tensor:
        return self.contract(ops.relu(self.expand(x)))


class EncoderLayer(Module):
    """Self-attention and feed-forward sublayers."""

    def __init__(self, cfg: TransformerConfig, rng: np.random.Generator):
        self.self_attention = MultiHeadAttention(cfg.d, cfg.heads, rng)
        self.norm1 = LayerNorm(cfg.d)
        self.feed_forward = FeedForward(cfg.d, cfg.ffn_hidden, rng)
        self.norm2 = LayerNorm(cfg.d)
        self._dropout = cfg.dropout
        self._rng = rng

    def _drop(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self._dropout, self._rng, training=self.training)

    def forward(self, x: Tensor, pos: Tensor):
        qk = ops.add(x, pos)
        attended, weights = self.self_attention(qk, qk, x)
        x = self.norm1(ops.add(x, self._drop(attended)))
        x = self.norm2(ops.add(x, self._drop(self.feed_forward(x))))
        return x, weights


class DecoderLayer(Module):
    """Content self-attention, content-to-style cross-attention, feed-forward."""

    def __init__(self, cfg: TransformerConfig, rng: np.random.Generator):
        self.self_attention = MultiHeadAttention(cfg.d, cfg.heads, rng)
        self.norm1 = LayerNorm(cfg.d)
        self.cross_attention = MultiHeadAttention(cfg.d, cfg.heads, rng)
        self.norm2 = LayerNorm(cfg.d)
        self.feed_forward = FeedForward(cfg.d, cfg.ffn_hidden, rng)
        self.norm3 = LayerNorm(cfg.d)
        self._dropout = cfg.dropout
        self._rng = rng

    def _drop(self, x: Tensor) -> Tensor:
        return ops.dropout(x, self._dropout, self._rng, training=self.training)

    def forward(self, t: Tensor, s: Tensor, pos_c: Tensor, pos_s: Tensor):
        qk = ops.add(t, pos_c)
        attended, self_weights = self.self_attention(qk, qk, t)
        t = self.norm1(ops.add(t, self._drop(attended)))
        matched, cross_weights = self.cross_attention(ops.add(t, pos_c), ops.add(s, pos_s), s)
        t = self.norm2(ops.add(t, self._drop(matched)))
        t = self.norm3(ops.add(t, self._drop(self.feed_forward(t))))
        return t, self_weights, cross_weights


@dataclass
class AttentionMap:
    """One query token's attention over the key grid."""

    weights: np.ndarray
    layer_index: int
    head_index: int
    query_index: int
    key_grid: tuple

    def as_grid(self) -> np.ndarray:
        """Weights reshaped to (grid_h, grid_w) of the key sequence."""
        return self.weights.reshape(self.key_grid)


class AttentionRecorder:
    """Per-invocation store of post-softmax weights for every attention layer."""

    def __init__(self):
        self._weights = {}
        self._grids = {}

    def record(self, module: str, layer: int, weights: np.ndarray, query_grid: tuple, key_grid: tuple):
        self._weights[(module, layer)] = weights
        self._grids[module] = (tuple(query_grid), tuple(key_grid))

    def layer_count(self, module: str) -> int:
        return sum(1 for name, _ in self._weights if name == module)

    def query_grid(self, module: str) -> tuple:
        if module not in self._grids:
            raise AttentionIndexError(f"No attention recorded for module {module!r}")
        return self._grids[module][0]

    def capture(self, module: str, layer: int, query_index: int, head: int = -1) -> AttentionMap:
        """
        Read one attention row.

        Args:
            module: "enc", "dec" (cross-attention) or "dec_self"
            layer: 0-based layer index
            query_index: Row-major query token index
            head: Head index, or -1 to average heads

        Returns:
            AttentionMap
        """
        if module not in ATTENTION_MODULES:
            raise AttentionIndexError(f"Unknown attention module {module!r}; use {ATTENTION_MODULES}")
        count = self.layer_count(module)
        if not 0 <= layer < count:
            raise AttentionIndexError(f"Layer {layer} out of range for {module!r} (0..{count - 1})")
        weights = self._weights[(module, layer)]
        heads, queries, _ = weights.shape
        if not 0 <= query_index < queries:
            raise AttentionIndexError(f"Query index {query_index} out of range (0..{queries - 1})")
        if head == -1:
            row = weights[:, query_index, :].mean(axis=0)
        elif 0 <= head < heads:
            row = weights[head, query_index, :].copy()
        else:
            raise AttentionIndexError(f"Head {head} out of range (0..{heads - 1}, or -1)")
        return AttentionMap(row, layer, head, query_index, self._grids[module][1])


def capture_attention(
    recorder: AttentionRecorder, module: str, layer: int, query_index: int, head: int = -1
) -> AttentionMap:
    """Post-softmax attention row of one query token, head-averaged by default."""
    return recorder.capture(module, layer, query_index, head)


class StyleEncoder(Module):
    """Stack of encoder layers turning style tokens into style codes."""

    def __init__(self, cfg: TransformerConfig, rng: np.random.Generator):
        self.layers = [EncoderLayer(cfg, rng) for _ in range(cfg.encoder_layers)]

    def forward(self, style: TokenSequence, pos: Tensor, recorder: AttentionRecorder = None):
        if pos.shape != style.tokens.shape:
            raise ShapeMismatchError(
                f"Positional encoding {pos.shape} does not match style tokens {style.tokens.shape}"
            )
        x = style.tokens
        grid = (style.grid_h, style.grid_w)
        for index, layer in enumerate(self.layers):
            x, weights = layer(x, pos)
            if recorder is not None:
                recorder.record("enc", index, weights, grid, grid)
        return TokenSequence(x, style.grid_h, style.grid_w)


class TokenDecoder(Module):
    """Stack of decoder layers matching content tokens with style codes."""

    def __init__(self, cfg: TransformerConfig, rng: np.random.Generator):
        self.layers = [DecoderLayer(cfg, rng) for _ in range(cfg.decoder_layers)]

    def forward(
        self,
        content: TokenSequence,
        style_codes: TokenSequence,
        pos_c: Tensor,
        pos_s: Tensor,
        recorder: AttentionRecorder = None,
    ):
        if content.width != style_codes.width:
            raise ShapeMismatchError(
                f"Content width {content.width} != style width {style_codes.width}"
            )
        if pos_c.shape != content.tokens.shape or pos_s.shape != style_codes.tokens.shape:
            raise ShapeMismatchError("Positional encodings must match their token shapes")
        t = content.tokens
        content_grid = (content.grid_h, content.grid_w)
        style_grid = (style_codes.grid_h, style_codes.grid_w)
        for index, layer in enumerate(self.layers):
            t, self_weights, cross_weights = layer(t, style_codes.tokens, pos_c, pos_s)
            if recorder is not None:
                recorder.record("dec_self", index, self_weights, content_grid, content_grid)
                recorder.record("dec", index, cross_weights, content_grid, style_grid)
        logging.debug("Decoded %d content tokens against %d style codes", content.length, style_codes.length)
        return TokenSequence(t, content.grid_h, content.grid_w)


def encode_style(style_tokens: TokenSequence, pos: Tensor, encoder: StyleEncoder, recorder=None) -> TokenSequence:
    """
    Contextualize style tokens with the self-attention encoder.

    Args:
        style_tokens: Style TokenSequence of width d
        pos: Positional encodings shaped like the tokens
        encoder: Encoder built from a TransformerConfig
        recorder: Optional AttentionRecorder

    Returns:
        Style codes with the input's shape and grid
    """
    return encoder(style_tokens, pos, recorder)


def decode(
    content_tokens: TokenSequence,
    style_codes: TokenSequence,
    pos_c: Tensor,
    pos_s: Tensor,
    decoder: TokenDecoder,
    recorder=None,
) -> TokenSequence:
    """Run the decoder stack; output has the content tokens' shape and grid."""
    return decoder(content_tokens, style_codes, pos_c, pos_s, recorder)
