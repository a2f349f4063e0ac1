"""Model configuration and subword-id vocabulary."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from ..bpe import DEFAULT_SPECIALS
from ..errors import VocabError

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIAL_TOKENS = [DEFAULT_SPECIALS["PAD"], DEFAULT_SPECIALS["BOS"],
                  DEFAULT_SPECIALS["EOS"], DEFAULT_SPECIALS["UNK"]]


@dataclass
class ModelConfig:
    vocab_size: int
    d_model: int = 128
    num_heads: int = 4
    encoder_layers: int = 2
    decoder_layers: int = 2
    ffn_dim: int = 512
    max_seq_len: int = 256
    dropout: float = 0.1
    seed: int = 0
    dtype: str = "float32"

    def __post_init__(self):
        if self.d_model % self.num_heads != 0:
            raise ValueError("d_model must be divisible by num_heads")
        for name in ("vocab_size", "d_model", "num_heads", "encoder_layers",
                     "decoder_layers", "ffn_dim", "max_seq_len"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class TrainConfig:
    learning_rate: float = 5e-5
    batch_size: int = 4
    epochs: int = 15
    grad_clip: float = 5.0
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8


class Vocab:
    """Subword-string <-> id table; ids 0..3 are PAD, BOS, EOS, UNK."""

    def __init__(self, subwords: Sequence[str]):
        self.tokens = SPECIAL_TOKENS + [s for s in subwords if s not in SPECIAL_TOKENS]
        self.index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise VocabError("duplicate subwords in vocabulary")

    @classmethod
    def from_corpus(cls, sequences) -> "Vocab":
        seen = sorted({s for seq in sequences for s in seq})
        return cls(seen)

    def __len__(self):
        return len(self.tokens)

    def encode(self, subwords: Sequence[str]) -> list[int]:
        return [self.index.get(s, UNK) for s in subwords]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.tokens[i] for i in ids]
