"""Beam-search generation with an incremental KV-cached decoder.

The incremental path computes each step from the last token only; its
output is numerically the same forward pass as ``decode_step`` (which
recomputes the whole prefix) and the test suite cross-checks the two.
No length normalization: hypotheses are ranked by raw summed log
probability, ties broken by lexicographic token ids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import LengthError
from .config import BOS, EOS, ModelConfig
from .layers import (
    attention_fwd,
    layer_norm_fwd,
    linear_fwd,
    log_softmax,
    merge_heads,
    relu_fwd,
    sinusoidal_encoding,
    split_heads,
)
from .transformer import EncoderState, encode, padding_mask


@dataclass
class BeamCandidate:
    tokens: list[int]
    log_prob: float
    terminated: bool


class IncrementalDecoder:
    """Step-wise decoder over a fixed encoder state."""

    def __init__(self, params, config: ModelConfig, state: EncoderState):
        self.params = params
        self.config = config
        h = config.num_heads
        H = state.H[None]
        self.cross_mask = padding_mask(state.source[None, :])
        self.cross_kv = []
        for i in range(config.decoder_layers):
            k, _ = linear_fwd(H, params[f"dec{i}.cross.Wk"], params[f"dec{i}.cross.bk"])
            v, _ = linear_fwd(H, params[f"dec{i}.cross.Wv"], params[f"dec{i}.cross.bv"])
            self.cross_kv.append((split_heads(k, h), split_heads(v, h)))
        self.self_k = [None] * config.decoder_layers
        self.self_v = [None] * config.decoder_layers
        self.pe = sinusoidal_encoding(config.max_seq_len, config.d_model,
                                      dtype=params["embed"].dtype)
        self.pos = 0

    def reorder(self, rows: np.ndarray) -> None:
        for i in range(self.config.decoder_layers):
            if self.self_k[i] is not None:
                self.self_k[i] = self.self_k[i][rows]
                self.self_v[i] = self.self_v[i][rows]

    def step(self, last_ids: np.ndarray) -> np.ndarray:
        """Feed one token per beam; returns log-probs (beams, vocab)."""
        p, cfg = self.params, self.config
        h = cfg.num_heads
        if self.pos >= cfg.max_seq_len:
            raise LengthError(f"decode position {self.pos} exceeds max_seq_len")
        x = p["embed"][last_ids][:, None, :] * np.sqrt(cfg.d_model) + self.pe[self.pos]
        x = x.astype(p["embed"].dtype)
        for i in range(cfg.decoder_layers):
            q, _ = linear_fwd(x, p[f"dec{i}.self.Wq"], p[f"dec{i}.self.bq"])
            k, _ = linear_fwd(x, p[f"dec{i}.self.Wk"], p[f"dec{i}.self.bk"])
            v, _ = linear_fwd(x, p[f"dec{i}.self.Wv"], p[f"dec{i}.self.bv"])
            kh, vh = split_heads(k, h), split_heads(v, h)
            if self.self_k[i] is None:
                self.self_k[i], self.self_v[i] = kh, vh
            else:
                self.self_k[i] = np.concatenate([self.self_k[i], kh], axis=2)
                self.self_v[i] = np.concatenate([self.self_v[i], vh], axis=2)
            attn, _ = attention_fwd(split_heads(q, h), self.self_k[i], self.self_v[i], None)
            out, _ = linear_fwd(merge_heads(attn), p[f"dec{i}.self.Wo"], p[f"dec{i}.self.bo"])
            x, _ = layer_norm_fwd(x + out, p[f"dec{i}.ln1.g"], p[f"dec{i}.ln1.b"])

            q, _ = linear_fwd(x, p[f"dec{i}.cross.Wq"], p[f"dec{i}.cross.bq"])
            ck, cv = self.cross_kv[i]
            attn, _ = attention_fwd(split_heads(q, h), ck, cv, self.cross_mask)
            out, _ = linear_fwd(merge_heads(attn), p[f"dec{i}.cross.Wo"], p[f"dec{i}.cross.bo"])
            x, _ = layer_norm_fwd(x + out, p[f"dec{i}.ln2.g"], p[f"dec{i}.ln2.b"])

            hid, _ = linear_fwd(x, p[f"dec{i}.ffn.W1"], p[f"dec{i}.ffn.b1"])
            act, _ = relu_fwd(hid)
            out, _ = linear_fwd(act, p[f"dec{i}.ffn.W2"], p[f"dec{i}.ffn.b2"])
            x, _ = layer_norm_fwd(x + out, p[f"dec{i}.ln3.g"], p[f"dec{i}.ln3.b"])
        logits, _ = linear_fwd(x[:, 0, :], p["out.W"], p["out.b"])
        self.pos += 1
        return log_softmax(logits.astype(np.float64))


def beam_search(
    params,
    config: ModelConfig,
    source,
    beam_width: int,
    max_len: int,
) -> list[BeamCandidate]:
    """Best-first search keeping beam_width live hypotheses per step.

    A hypothesis freezes when it emits EOS; the search stops once the
    beam_width best hypotheses are all frozen, or after max_len generated
    tokens. Result is strictly sorted by descending log_prob (lexicographic
    token-id tie-break) and has at most beam_width entries.
    """
    if beam_width < 1:
        raise ValueError("beam_width must be >= 1")
    if max_len + 1 > config.max_seq_len:
        raise LengthError(f"max_len {max_len} + BOS exceeds max_seq_len {config.max_seq_len}")
    state = encode(params, config, source)
    decoder = IncrementalDecoder(params, config, state)
    logp = decoder.step(np.array([BOS], dtype=np.int64))  # (1, V)

    # each live entry: (log_prob, tokens tuple, cache row of its parent)
    live: list[tuple[float, tuple[int, ...], int]] = [(0.0, (), 0)]
    frozen: list[tuple[float, tuple[int, ...]]] = []
    vocab = config.vocab_size

    for step in range(max_len):
        scores = np.array([lp for lp, _, _ in live])[:, None] + logp
        flat = scores.reshape(-1)
        pool: list[tuple[float, tuple[int, ...], int | None]] = [
            (lp, toks, None) for lp, toks in frozen
        ]
        k = min(beam_width, flat.size)
        top_idx = np.argpartition(-flat, k - 1)[:k]
        threshold = flat[top_idx].min()
        candidate_idx = np.nonzero(flat >= threshold)[0]
        for idx in candidate_idx:
            row, tok = divmod(int(idx), vocab)
            lp, toks, _ = live[row]
            pool.append((float(flat[idx]), toks + (tok,), row))
        pool.sort(key=lambda c: (-c[0], c[1]))
        selected = pool[:beam_width]

        new_live: list[tuple[float, tuple[int, ...], int]] = []
        frozen = []
        for lp, toks, row in selected:
            if row is None or toks[-1] == EOS:
                frozen.append((lp, toks))
            else:
                new_live.append((lp, toks, row))
        live = new_live
        if not live or step == max_len - 1:
            break
        rows = np.array([row for _, _, row in live], dtype=np.int64)
        decoder.reorder(rows)
        last = np.array([toks[-1] for _, toks, _ in live], dtype=np.int64)
        logp = decoder.step(last)
        live = [(lp, toks, i) for i, (lp, toks, _) in enumerate(live)]

    results = frozen + [(lp, toks) for lp, toks, _ in live]
    results.sort(key=lambda c: (-c[0], c[1]))
    return [
        BeamCandidate(tokens=list(toks), log_prob=lp, terminated=bool(toks and toks[-1] == EOS))
        for lp, toks in results[:beam_width]
    ]


def greedy_decode(params, config: ModelConfig, source, max_len: int) -> BeamCandidate:
    return beam_search(params, config, source, beam_width=1, max_len=max_len)[0]
