"""Teacher-forced training with Adam and best-validation-epoch selection."""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..errors import TrainingDiverged
from .config import BOS, EOS, PAD, ModelConfig, TrainConfig
from .transformer import init_params, loss_and_grads, loss_only

log = logging.getLogger(__name__)

Pair = tuple[list[int], list[int]]


def pack_batch(pairs: Sequence[Pair], dtype=np.int64):
    """Pad a batch of (source_ids, target_ids) examples.

    Decoder input is BOS + target; labels are target + EOS; both padded
    with PAD, which the loss masks out.
    """
    src_len = max(len(s) for s, _ in pairs)
    tgt_len = max(len(t) for _, t in pairs) + 1
    b = len(pairs)
    src = np.full((b, src_len), PAD, dtype=dtype)
    tgt_in = np.full((b, tgt_len), PAD, dtype=dtype)
    tgt_out = np.full((b, tgt_len), PAD, dtype=dtype)
    for i, (s, t) in enumerate(pairs):
        src[i, : len(s)] = s
        tgt_in[i, 0] = BOS
        tgt_in[i, 1 : len(t) + 1] = t
        tgt_out[i, : len(t)] = t
        tgt_out[i, len(t)] = EOS
    return src, tgt_in, tgt_out


class Adam:
    def __init__(self, params, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads):
        c = self.cfg
        self.t += 1
        if c.grad_clip and c.grad_clip > 0:
            norm = np.sqrt(sum(float((g * g).sum()) for g in grads.values()))
            if norm > c.grad_clip:
                scale = c.grad_clip / norm
                grads = {k: g * scale for k, g in grads.items()}
        correction = np.sqrt(1.0 - c.adam_beta2**self.t) / (1.0 - c.adam_beta1**self.t)
        for k, p in params.items():
            g = grads[k]
            self.m[k] = c.adam_beta1 * self.m[k] + (1 - c.adam_beta1) * g
            self.v[k] = c.adam_beta2 * self.v[k] + (1 - c.adam_beta2) * (g * g)
            p -= (c.learning_rate * correction) * self.m[k] / (np.sqrt(self.v[k]) + c.adam_eps)


def _validate_lengths(pairs: Sequence[Pair], config: ModelConfig, label: str):
    for s, t in pairs:
        if len(s) > config.max_seq_len or len(t) + 2 > config.max_seq_len:
            raise ValueError(
                f"{label} example exceeds max_seq_len {config.max_seq_len} "
                f"(source {len(s)}, target {len(t)} + BOS/EOS)"
            )


def evaluate_loss(params, config, pairs: Sequence[Pair], batch_size: int = 32) -> float:
    total, count = 0.0, 0
    for i in range(0, len(pairs), batch_size):
        batch = pairs[i : i + batch_size]
        src, tgt_in, tgt_out = pack_batch(batch)
        n = int((tgt_out != PAD).sum())
        total += loss_only(params, config, src, tgt_in, tgt_out) * n
        count += n
    return total / max(count, 1)


def train(
    train_pairs: Sequence[Pair],
    valid_pairs: Sequence[Pair],
    config: ModelConfig,
    train_config: TrainConfig | None = None,
) -> tuple[dict[str, np.ndarray], list[dict]]:
    """Minimize teacher-forced cross-entropy; return the parameters of the
    best validation epoch plus the per-epoch history.

    Deterministic given (data, config, seed): initialization, batch order
    and dropout all derive from config.seed on the single-threaded path.
    """
    if not train_pairs:
        raise ValueError("empty training set")
    tc = train_config or TrainConfig()
    _validate_lengths(train_pairs, config, "train")
    _validate_lengths(valid_pairs, config, "valid")
    params = init_params(config)
    optimizer = Adam(params, tc)
    rng = np.random.default_rng(config.seed + 1)
    dropout_rng = np.random.default_rng(config.seed + 2)
    best_val = np.inf
    best_params = {k: v.copy() for k, v in params.items()}
    last_finite = best_params
    history: list[dict] = []
    order = np.arange(len(train_pairs))
    for epoch in range(1, tc.epochs + 1):
        rng.shuffle(order)
        epoch_loss, steps = 0.0, 0
        for start in range(0, len(order), tc.batch_size):
            batch = [train_pairs[i] for i in order[start : start + tc.batch_size]]
            src, tgt_in, tgt_out = pack_batch(batch)
            loss, grads = loss_and_grads(
                params, config, src, tgt_in, tgt_out, rng=dropout_rng, training=True
            )
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch} step {steps}", last_params=last_finite
                )
            optimizer.step(params, grads)
            epoch_loss += float(loss)
            steps += 1
        last_finite = {k: v.copy() for k, v in params.items()}
        val_loss = evaluate_loss(params, config, valid_pairs) if valid_pairs else epoch_loss / steps
        history.append({"epoch": epoch, "train_loss": epoch_loss / steps, "valid_loss": val_loss})
        log.info("epoch %d/%d train %.4f valid %.4f", epoch, tc.epochs, epoch_loss / steps, val_loss)
        if val_loss < best_val:
            best_val = val_loss
            best_params = {k: v.copy() for k, v in params.items()}
    return best_params, history
