"""Compact transformer encoder-decoder with hand-derived gradients.

Parameters live in a flat dict keyed by dotted names; every forward pass
returns a cache that the matching backward pass walks in reverse. The
batched paths serve training; the single-sequence ``encode`` and
``decode_step`` functions are the library surface used by generation and
by the numeric test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthError, VocabError
from .config import BOS, PAD, ModelConfig
from .layers import (
    MASK_VALUE,
    attention_bwd,
    attention_fwd,
    dropout_bwd,
    dropout_fwd,
    layer_norm_bwd,
    layer_norm_fwd,
    linear_bwd,
    linear_fwd,
    merge_heads,
    relu_bwd,
    relu_fwd,
    sinusoidal_encoding,
    softmax,
    split_heads,
)


@dataclass
class EncoderState:
    """Encoder output H: one row per source position."""

    H: np.ndarray
    source: np.ndarray

    def __post_init__(self):
        assert self.H.shape[0] == len(self.source)


def _np_dtype(config: ModelConfig):
    return np.float32 if config.dtype == "float32" else np.float64


def init_params(config: ModelConfig) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(config.seed)
    dtype = _np_dtype(config)
    d, f, v = config.d_model, config.ffn_dim, config.vocab_size
    params: dict[str, np.ndarray] = {}

    def glorot(name, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params[name] = rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)

    def zeros(name, *shape):
        params[name] = np.zeros(shape, dtype=dtype)

    def ones(name, *shape):
        params[name] = np.ones(shape, dtype=dtype)

    params["embed"] = (rng.standard_normal((v, d)) * d**-0.5).astype(dtype)

    def attn_block(prefix):
        for w in ("Wq", "Wk", "Wv", "Wo"):
            glorot(f"{prefix}.{w}", d, d)
        for b in ("bq", "bk", "bv", "bo"):
            zeros(f"{prefix}.{b}", d)

    def ln_block(prefix):
        ones(f"{prefix}.g", d)
        zeros(f"{prefix}.b", d)

    def ffn_block(prefix):
        glorot(f"{prefix}.W1", d, f)
        zeros(f"{prefix}.b1", f)
        glorot(f"{prefix}.W2", f, d)
        zeros(f"{prefix}.b2", d)

    for i in range(config.encoder_layers):
        attn_block(f"enc{i}.attn")
        ln_block(f"enc{i}.ln1")
        ffn_block(f"enc{i}.ffn")
        ln_block(f"enc{i}.ln2")
    for i in range(config.decoder_layers):
        attn_block(f"dec{i}.self")
        ln_block(f"dec{i}.ln1")
        attn_block(f"dec{i}.cross")
        ln_block(f"dec{i}.ln2")
        ffn_block(f"dec{i}.ffn")
        ln_block(f"dec{i}.ln3")
    glorot("out.W", d, v)
    zeros("out.b", v)
    return params


def zero_grads(params: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.items()}


# ---------------------------------------------------------------------------
# shared sub-blocks


def _mha_fwd(params, prefix, x_q, x_kv, mask, num_heads):
    q, cq = linear_fwd(x_q, params[f"{prefix}.Wq"], params[f"{prefix}.bq"])
    k, ck = linear_fwd(x_kv, params[f"{prefix}.Wk"], params[f"{prefix}.bk"])
    v, cv = linear_fwd(x_kv, params[f"{prefix}.Wv"], params[f"{prefix}.bv"])
    attn, ca = attention_fwd(
        split_heads(q, num_heads), split_heads(k, num_heads), split_heads(v, num_heads), mask
    )
    merged = merge_heads(attn)
    out, co = linear_fwd(merged, params[f"{prefix}.Wo"], params[f"{prefix}.bo"])
    return out, (cq, ck, cv, ca, co, num_heads)


def _mha_bwd(dout, cache, prefix, grads):
    cq, ck, cv, ca, co, num_heads = cache
    dmerged, dWo, dbo = linear_bwd(dout, co)
    grads[f"{prefix}.Wo"] += dWo
    grads[f"{prefix}.bo"] += dbo
    dattn = split_heads(dmerged, num_heads)
    dq_h, dk_h, dv_h = attention_bwd(dattn, ca)
    dq, dk, dv = merge_heads(dq_h), merge_heads(dk_h), merge_heads(dv_h)
    dx_q, dWq, dbq = linear_bwd(dq, cq)
    dx_kv_k, dWk, dbk = linear_bwd(dk, ck)
    dx_kv_v, dWv, dbv = linear_bwd(dv, cv)
    grads[f"{prefix}.Wq"] += dWq
    grads[f"{prefix}.bq"] += dbq
    grads[f"{prefix}.Wk"] += dWk
    grads[f"{prefix}.bk"] += dbk
    grads[f"{prefix}.Wv"] += dWv
    grads[f"{prefix}.bv"] += dbv
    return dx_q, dx_kv_k + dx_kv_v


def _ffn_fwd(params, prefix, x):
    h, c1 = linear_fwd(x, params[f"{prefix}.W1"], params[f"{prefix}.b1"])
    a, cr = relu_fwd(h)
    out, c2 = linear_fwd(a, params[f"{prefix}.W2"], params[f"{prefix}.b2"])
    return out, (c1, cr, c2)


def _ffn_bwd(dout, cache, prefix, grads):
    c1, cr, c2 = cache
    da, dW2, db2 = linear_bwd(dout, c2)
    grads[f"{prefix}.W2"] += dW2
    grads[f"{prefix}.b2"] += db2
    dh = relu_bwd(da, cr)
    dx, dW1, db1 = linear_bwd(dh, c1)
    grads[f"{prefix}.W1"] += dW1
    grads[f"{prefix}.b1"] += db1
    return dx


def _sublayer_fwd(params, ln_prefix, x, sub_out, dropout_p, rng, training):
    dropped, keep = dropout_fwd(sub_out, dropout_p, rng, training)
    out, cln = layer_norm_fwd(x + dropped, params[f"{ln_prefix}.g"], params[f"{ln_prefix}.b"])
    return out, (keep, cln)


def _sublayer_bwd(dout, cache, ln_prefix, grads):
    keep, cln = cache
    dsum, dg, db = layer_norm_bwd(dout, cln)
    grads[f"{ln_prefix}.g"] += dg
    grads[f"{ln_prefix}.b"] += db
    dsub = dropout_bwd(dsum, keep)
    return dsum, dsub  # gradient wrt residual input, gradient into sublayer


# ---------------------------------------------------------------------------
# embedding and masks


def _embed_fwd(params, config, ids, positional=True):
    d = config.d_model
    x = params["embed"][ids] * np.sqrt(d)
    if positional:
        pe = sinusoidal_encoding(ids.shape[-1], d, dtype=params["embed"].dtype)
        x = x + pe
    return x.astype(params["embed"].dtype), ids


def _embed_bwd(dx, ids, config, grads):
    d = config.d_model
    flat_ids = ids.reshape(-1)
    flat_dx = (dx * np.sqrt(d)).reshape(-1, d)
    np.add.at(grads["embed"], flat_ids, flat_dx)


def padding_mask(ids: np.ndarray) -> np.ndarray:
    """Additive key mask (batch, 1, 1, T): MASK_VALUE on pad columns."""
    return np.where(ids[:, None, None, :] == PAD, MASK_VALUE, 0.0)


def causal_mask(t: int) -> np.ndarray:
    """Additive (1, 1, t, t) mask hiding future positions."""
    upper = np.triu(np.ones((t, t)), k=1)
    return (upper * MASK_VALUE)[None, None]


# ---------------------------------------------------------------------------
# batched encoder / decoder


def encode_batch(params, config, src_ids, rng=None, training=False, positional=True):
    x, emb_cache = _embed_fwd(params, config, src_ids, positional)
    mask = padding_mask(src_ids)
    caches = []
    for i in range(config.encoder_layers):
        attn, c_attn = _mha_fwd(params, f"enc{i}.attn", x, x, mask, config.num_heads)
        x, c_sub1 = _sublayer_fwd(params, f"enc{i}.ln1", x, attn, config.dropout, rng, training)
        ffn, c_ffn = _ffn_fwd(params, f"enc{i}.ffn", x)
        x, c_sub2 = _sublayer_fwd(params, f"enc{i}.ln2", x, ffn, config.dropout, rng, training)
        caches.append((c_attn, c_sub1, c_ffn, c_sub2))
    return x, (emb_cache, caches)


def encode_batch_bwd(dH, cache, params, config, grads):
    emb_cache, caches = cache
    dx = dH
    for i in reversed(range(config.encoder_layers)):
        c_attn, c_sub1, c_ffn, c_sub2 = caches[i]
        dx, dffn = _sublayer_bwd(dx, c_sub2, f"enc{i}.ln2", grads)
        dx = dx + _ffn_bwd(dffn, c_ffn, f"enc{i}.ffn", grads)
        dx, dattn = _sublayer_bwd(dx, c_sub1, f"enc{i}.ln1", grads)
        dq, dkv = _mha_bwd(dattn, c_attn, f"enc{i}.attn", grads)
        dx = dx + dq + dkv
    _embed_bwd(dx, emb_cache, config, grads)


def decode_batch(params, config, H, src_ids, tgt_in, rng=None, training=False):
    x, emb_cache = _embed_fwd(params, config, tgt_in)
    t = tgt_in.shape[-1]
    self_mask = causal_mask(t) + padding_mask(tgt_in)
    cross_mask = padding_mask(src_ids)
    caches = []
    for i in range(config.decoder_layers):
        self_attn, c_self = _mha_fwd(params, f"dec{i}.self", x, x, self_mask, config.num_heads)
        x, c_sub1 = _sublayer_fwd(params, f"dec{i}.ln1", x, self_attn, config.dropout, rng, training)
        cross, c_cross = _mha_fwd(params, f"dec{i}.cross", x, H, cross_mask, config.num_heads)
        x, c_sub2 = _sublayer_fwd(params, f"dec{i}.ln2", x, cross, config.dropout, rng, training)
        ffn, c_ffn = _ffn_fwd(params, f"dec{i}.ffn", x)
        x, c_sub3 = _sublayer_fwd(params, f"dec{i}.ln3", x, ffn, config.dropout, rng, training)
        caches.append((c_self, c_sub1, c_cross, c_sub2, c_ffn, c_sub3))
    logits, c_out = linear_fwd(x, params["out.W"], params["out.b"])
    return logits, (emb_cache, caches, c_out)


def decode_batch_bwd(dlogits, cache, params, config, grads):
    """Returns dH, the gradient flowing back into the encoder output."""
    emb_cache, caches, c_out = cache
    dx, dWout, dbout = linear_bwd(dlogits, c_out)
    grads["out.W"] += dWout
    grads["out.b"] += dbout
    dH = None
    for i in reversed(range(config.decoder_layers)):
        c_self, c_sub1, c_cross, c_sub2, c_ffn, c_sub3 = caches[i]
        dx, dffn = _sublayer_bwd(dx, c_sub3, f"dec{i}.ln3", grads)
        dx = dx + _ffn_bwd(dffn, c_ffn, f"dec{i}.ffn", grads)
        dx, dcross = _sublayer_bwd(dx, c_sub2, f"dec{i}.ln2", grads)
        dq, dkv = _mha_bwd(dcross, c_cross, f"dec{i}.cross", grads)
        dx = dx + dq
        dH = dkv if dH is None else dH + dkv
        dx, dself = _sublayer_bwd(dx, c_sub1, f"dec{i}.ln1", grads)
        dq, dkv = _mha_bwd(dself, c_self, f"dec{i}.self", grads)
        dx = dx + dq + dkv
    _embed_bwd(dx, emb_cache, config, grads)
    return dH


# ---------------------------------------------------------------------------
# single-sequence library surface


def _check_ids(config, ids):
    arr = np.asarray(ids, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= config.vocab_size):
        raise VocabError(f"token id out of range [0, {config.vocab_size})")
    return arr


def encode(params, config: ModelConfig, source, positional: bool = True) -> EncoderState:
    """Encoder output for one source id sequence: shape (len, d_model)."""
    src = _check_ids(config, source)
    if len(src) > config.max_seq_len:
        raise LengthError(f"source length {len(src)} exceeds max_seq_len {config.max_seq_len}")
    H, _ = encode_batch(params, config, src[None, :], positional=positional)
    return EncoderState(H=H[0], source=src)


def decode_step(params, config: ModelConfig, state: EncoderState, prefix) -> np.ndarray:
    """Next-token distribution after the given BOS-led prefix.

    Recomputes the full decoder stack over the prefix; the causal mask
    guarantees the result only depends on the prefix itself.
    """
    pre = _check_ids(config, prefix)
    if len(pre) == 0 or pre[0] != BOS:
        raise ValueError("prefix must start with BOS")
    if len(pre) > config.max_seq_len:
        raise LengthError(f"prefix length {len(pre)} exceeds max_seq_len {config.max_seq_len}")
    logits, _ = decode_batch(params, config, state.H[None], state.source[None, :], pre[None, :])
    return softmax(logits[0, -1])


def loss_and_grads(params, config, src_ids, tgt_in, tgt_out, rng=None, training=True):
    """Teacher-forced mean cross-entropy and parameter gradients."""
    from .layers import cross_entropy_fwd

    H, enc_cache = encode_batch(params, config, src_ids, rng, training)
    logits, dec_cache = decode_batch(params, config, H, src_ids, tgt_in, rng, training)
    loss, dlogits = cross_entropy_fwd(logits, tgt_out, PAD)
    grads = zero_grads(params)
    dH = decode_batch_bwd(dlogits, dec_cache, params, config, grads)
    encode_batch_bwd(dH, enc_cache, params, config, grads)
    return loss, grads


def loss_only(params, config, src_ids, tgt_in, tgt_out):
    from .layers import cross_entropy_fwd

    H, _ = encode_batch(params, config, src_ids)
    logits, _ = decode_batch(params, config, H, src_ids, tgt_in)
    loss, _ = cross_entropy_fwd(logits, tgt_out, PAD)
    return loss
