"""Numpy building blocks with paired forward/backward passes.

Every *_fwd returns (output, cache); the matching *_bwd consumes the
upstream gradient plus that cache. Shapes follow (batch, time, feature)
with attention heads split as (batch, head, time, head_dim).
"""

from __future__ import annotations

import numpy as np

LN_EPS = 1e-5
MASK_VALUE = -1e9


def linear_fwd(x, W, b):
    return x @ W + b, (x, W)


def linear_bwd(dy, cache):
    x, W = cache
    dx = dy @ W.T
    flat_x = x.reshape(-1, W.shape[0])
    flat_dy = dy.reshape(-1, W.shape[1])
    dW = flat_x.T @ flat_dy
    db = flat_dy.sum(axis=0)
    return dx, dW, db


def relu_fwd(x):
    return np.maximum(x, 0.0), x > 0


def relu_bwd(dy, mask):
    return dy * mask


def layer_norm_fwd(x, gamma, beta, eps=LN_EPS):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    return xhat * gamma + beta, (xhat, inv, gamma)


def layer_norm_bwd(dy, cache):
    xhat, inv, gamma = cache
    d = xhat.shape[-1]
    dgamma = (dy * xhat).reshape(-1, d).sum(axis=0)
    dbeta = dy.reshape(-1, d).sum(axis=0)
    dxhat = dy * gamma
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dgamma, dbeta


def softmax(x):
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(x):
    shifted = x - x.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def attention_fwd(q, k, v, mask):
    """Scaled dot-product attention. mask is additive, broadcastable to
    (batch, head, Tq, Tk), holding 0 or MASK_VALUE."""
    dk = q.shape[-1]
    scale = 1.0 / np.sqrt(dk)
    scores = (q @ k.swapaxes(-1, -2)) * scale
    if mask is not None:
        scores = scores + mask
    attn = softmax(scores)
    out = attn @ v
    return out, (q, k, v, attn, scale)


def attention_bwd(dout, cache):
    q, k, v, attn, scale = cache
    dattn = dout @ v.swapaxes(-1, -2)
    dv = attn.swapaxes(-1, -2) @ dout
    dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
    dq = (dscores @ k) * scale
    dk = (dscores.swapaxes(-1, -2) @ q) * scale
    return dq, dk, dv


def split_heads(x, num_heads):
    b, t, d = x.shape
    return x.reshape(b, t, num_heads, d // num_heads).transpose(0, 2, 1, 3)


def merge_heads(x):
    b, h, t, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dk)


def dropout_fwd(x, p, rng, training):
    if not training or p <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= p).astype(x.dtype) / (1.0 - p)
    return x * keep, keep


def dropout_bwd(dy, keep):
    return dy if keep is None else dy * keep


def sinusoidal_encoding(max_len: int, d_model: int, dtype=np.float64) -> np.ndarray:
    positions = np.arange(max_len, dtype=np.float64)[:, None]
    dims = np.arange(d_model, dtype=np.float64)[None, :]
    angles = positions / np.power(10000.0, 2.0 * (dims // 2) / d_model)
    pe = np.where(dims % 2 == 0, np.sin(angles), np.cos(angles))
    return pe.astype(dtype)


def cross_entropy_fwd(logits, labels, pad_id):
    """Mean negative log-likelihood over non-pad label positions.

    Returns (loss, dlogits): the gradient is cheap to form here because
    softmax and the one-hot subtraction share intermediates.
    """
    b, t, v = logits.shape
    logp = log_softmax(logits)
    mask = labels != pad_id
    n = int(mask.sum())
    if n == 0:
        raise ValueError("batch contains no unmasked label positions")
    picked = np.take_along_axis(logp, labels[..., None], axis=-1)[..., 0]
    loss = -(picked * mask).sum() / n
    probs = np.exp(logp)
    grad = probs
    rows = np.arange(b)[:, None], np.arange(t)[None, :]
    grad[rows[0], rows[1], labels] -= 1.0
    grad *= mask[..., None] / n
    return loss, grad
