"""Byte-pair encoding over code-token texts.

learn() records merge operations from a training corpus; apply() replays
them on any token list; detokenize() inverts apply exactly. Tokens are
decomposed into characters plus an end-of-word marker symbol, so frequent
tokens end up as single subwords while rare ones split.

Token texts containing the literal end-of-word marker substring are not
supported (the marker is chosen to make that vanishingly rare for code).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

DEFAULT_MARKER = "</w>"
DEFAULT_SPECIALS = {"PAD": "<pad>", "BOS": "<s>", "EOS": "</s>", "UNK": "<unk>"}


@dataclass
class BpeModel:
    merges: list[tuple[str, str]]
    vocab: set[str]
    end_of_word_marker: str = DEFAULT_MARKER
    specials: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_SPECIALS))

    def __post_init__(self):
        if len(set(self.merges)) != len(self.merges):
            raise ValueError("duplicate merge pairs")
        self._ranks = {pair: i for i, pair in enumerate(self.merges)}
        self._cache: dict[str, tuple[str, ...]] = {}

    @property
    def ranks(self) -> dict[tuple[str, str], int]:
        return self._ranks


def _merge_word(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    a, b = pair
    out = []
    i = 0
    n = len(symbols)
    while i < n:
        if i < n - 1 and symbols[i] == a and symbols[i + 1] == b:
            out.append(a + b)
            i += 2
        else:
            out.append(symbols[i])
            i += 1
    return out


def _pair_counts(symbols: Sequence[str]) -> Counter:
    return Counter(zip(symbols, symbols[1:]))


def learn(corpus: Iterable[Sequence[str]], num_merges: int,
          marker: str = DEFAULT_MARKER) -> BpeModel:
    """Learn merge operations from token sequences.

    Repeats num_merges times (or until no adjacent pair occurs at least
    twice): record the most frequent pair, ties broken lexicographically
    by (left, right), then apply it to the working vocabulary.
    """
    word_freq = Counter()
    for seq in corpus:
        word_freq.update(seq)
    if not word_freq:
        raise ValueError("corpus is empty")

    words = {w: list(w) + [marker] for w in word_freq}
    pair_counts: Counter = Counter()
    pair_words: dict[tuple[str, str], set[str]] = {}
    for w, freq in word_freq.items():
        for pair, c in _pair_counts(words[w]).items():
            pair_counts[pair] += c * freq
            pair_words.setdefault(pair, set()).add(w)

    merges: list[tuple[str, str]] = []
    alphabet = {sym for syms in words.values() for sym in syms}
    merged_symbols: list[str] = []
    for _ in range(num_merges):
        best = None
        for pair, count in pair_counts.items():
            if count < 2:
                continue
            key = (-count, pair)
            if best is None or key < best[0]:
                best = (key, pair)
        if best is None:
            break
        pair = best[1]
        merges.append(pair)
        merged_symbols.append(pair[0] + pair[1])
        for w in sorted(pair_words.get(pair, ())):
            old = words[w]
            new = _merge_word(old, pair)
            if new == old:
                continue  # stale index entry
            freq = word_freq[w]
            delta = _pair_counts(new)
            delta.subtract(_pair_counts(old))
            for p, d in delta.items():
                if d == 0:
                    continue
                pair_counts[p] += d * freq
                if pair_counts[p] <= 0:
                    del pair_counts[p]
                else:
                    pair_words.setdefault(p, set()).add(w)
            words[w] = new
        pair_counts.pop(pair, None)

    specials = dict(DEFAULT_SPECIALS)
    vocab = alphabet | set(merged_symbols) | {marker} | set(specials.values())
    return BpeModel(merges=merges, vocab=vocab, end_of_word_marker=marker, specials=specials)


def apply(tokens: Sequence[str], model: BpeModel) -> list[str]:
    """Split each token into subwords by replaying the learned merges.

    Equivalent to applying the merges in learned order; implemented as a
    lowest-rank-first loop with a per-token cache. Unknown characters stay
    as singleton subwords; special tokens pass through whole.
    """
    ranks = model.ranks
    marker = model.end_of_word_marker
    special_values = set(model.specials.values())
    out: list[str] = []
    for token in tokens:
        if token in special_values:
            out.append(token)
            continue
        cached = model._cache.get(token)
        if cached is None:
            symbols = list(token) + [marker]
            while len(symbols) > 1:
                best = min(
                    (ranks[p] for p in zip(symbols, symbols[1:]) if p in ranks),
                    default=None,
                )
                if best is None:
                    break
                symbols = _merge_word(symbols, model.merges[best])
            cached = tuple(symbols)
            model._cache[token] = cached
        out.extend(cached)
    return out


def detokenize(subwords: Sequence[str], marker: str = DEFAULT_MARKER) -> list[str]:
    """Concatenate subwords back into tokens, splitting at end-of-word
    markers. A dangling partial token (truncated generation) is emitted
    as-is."""
    tokens: list[str] = []
    buf: list[str] = []
    for sw in subwords:
        buf.append(sw)
        if sw.endswith(marker):
            tokens.append("".join(buf)[: -len(marker)])
            buf = []
    if buf:
        tokens.append("".join(buf))
    return tokens


_ESCAPES = [("\\", "\\\\"), (" ", "\\s"), ("\t", "\\t"), ("\n", "\\n"), ("\r", "\\r")]


def _escape(sym: str) -> str:
    for raw, esc in _ESCAPES:
        sym = sym.replace(raw, esc)
    return sym


def _unescape(sym: str) -> str:
    out = []
    i = 0
    while i < len(sym):
        if sym[i] == "\\" and i + 1 < len(sym):
            nxt = sym[i + 1]
            out.append({"\\": "\\", "s": " ", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(sym[i])
            i += 1
    return "".join(out)


def save_merges(model: BpeModel, path: str | Path) -> None:
    """Merges file: version header, then one `left right` line per merge
    in learned order. Spaces inside symbols are escaped as `\\s`."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"updatebench-bpe v1 marker={_escape(model.end_of_word_marker)}\n")
        for left, right in model.merges:
            fh.write(f"{_escape(left)} {_escape(right)}\n")


def load_merges(path: str | Path) -> BpeModel:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if not header.startswith("updatebench-bpe v1"):
            raise ValueError(f"unrecognized merges file header: {header!r}")
        marker = _unescape(header.split("marker=", 1)[1])
        merges = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            left, right = line.split(" ")
            merges.append((_unescape(left), _unescape(right)))
    alphabet = {ch for pair in merges for sym in pair for ch in sym}
    vocab = alphabet | {a + b for a, b in merges} | {marker} | set(DEFAULT_SPECIALS.values())
    return BpeModel(merges=merges, vocab=vocab, end_of_word_marker=marker)
