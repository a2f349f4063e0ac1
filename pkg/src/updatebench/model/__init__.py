from .beam import BeamCandidate, IncrementalDecoder, beam_search, greedy_decode
from .checkpoint import load_checkpoint, save_checkpoint
from .config import BOS, EOS, PAD, UNK, ModelConfig, TrainConfig, Vocab
from .training import evaluate_loss, pack_batch, train
from .transformer import (
    EncoderState,
    decode_step,
    encode,
    init_params,
    loss_and_grads,
    loss_only,
)

__all__ = [
    "BOS", "EOS", "PAD", "UNK",
    "BeamCandidate", "EncoderState", "IncrementalDecoder",
    "ModelConfig", "TrainConfig", "Vocab",
    "beam_search", "decode_step", "encode", "evaluate_loss", "greedy_decode",
    "init_params", "load_checkpoint", "loss_and_grads", "loss_only",
    "pack_batch", "save_checkpoint", "train",
]
