"""Typed-ID abstraction of identifiers and literals, and its inverse.

A single map is shared by both versions of a pair so unchanged identifiers
keep the same ID across versions. IDs are `CAT_N` with N assigned in first
appearance order per category. De-abstraction fails loudly for IDs that
were never assigned, mirroring the core limitation of the technique: a
genuinely new token in the updated version has no entry to map back to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import UnmappableToken
from .javalite import KEYWORDS

CATEGORIES = ("VAR", "METHOD", "TYPE", "STRING", "CHAR", "INT", "FLOAT")

_ID_RE = re.compile(r"^(VAR|METHOD|TYPE|STRING|CHAR|INT|FLOAT)_(\d+)$")
_IDENT_RE = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")
_ANNOTATION_RE = re.compile(r"^@[A-Za-z_$]")
_FLOAT_RE = re.compile(r"^(?:\d[\d_]*\.[\d_]*(?:[eE][+-]?\d+)?[fFdD]?|\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?|\d[\d_]*[eE][+-]?\d+[fFdD]?|\d[\d_]*[fFdD])$")
_INT_RE = re.compile(r"^(?:0[xX][0-9a-fA-F_]+[lL]?|0[bB][01_]+[lL]?|\d[\d_]*[lL]?)$")

_TYPE_CONTEXT_BEFORE = frozenset(["new", "extends", "implements", "throws", "instanceof"])


@dataclass
class AbstractionMap:
    forward: dict[str, str] = field(default_factory=dict)
    backward: dict[str, str] = field(default_factory=dict)
    next_index: dict[str, int] = field(default_factory=lambda: {c: 1 for c in CATEGORIES})

    def assign(self, text: str, category: str) -> str:
        if text in self.forward:
            return self.forward[text]
        abstract_id = f"{category}_{self.next_index[category]}"
        self.next_index[category] += 1
        self.forward[text] = abstract_id
        self.backward[abstract_id] = text
        return abstract_id

    def to_dict(self) -> dict[str, str]:
        return dict(self.backward)

    @classmethod
    def from_dict(cls, backward: dict[str, str]) -> "AbstractionMap":
        m = cls()
        m.backward = dict(backward)
        m.forward = {v: k for k, v in backward.items()}
        for abstract_id in backward:
            match = _ID_RE.match(abstract_id)
            if match:
                cat, n = match.group(1), int(match.group(2))
                m.next_index[cat] = max(m.next_index[cat], n + 1)
        return m


def is_abstract_id(text: str) -> bool:
    return _ID_RE.match(text) is not None


def _literal_category(text: str) -> str | None:
    if text.startswith('"'):
        return "STRING"
    if text.startswith("'"):
        return "CHAR"
    if _FLOAT_RE.match(text):
        return "FLOAT"
    if _INT_RE.match(text):
        return "INT"
    return None


def _classify(tokens: Sequence[str], i: int) -> str | None:
    """Category for tokens[i], or None when the token stays literal."""
    text = tokens[i]
    if text in KEYWORDS:
        return None
    if _ANNOTATION_RE.match(text):
        return "TYPE"  # annotation names are type names
    lit = _literal_category(text)
    if lit:
        return lit
    if not _IDENT_RE.match(text):
        return None  # operator or punctuation
    nxt = tokens[i + 1] if i + 1 < len(tokens) else ""
    prev = tokens[i - 1] if i > 0 else ""
    if nxt == "(":
        return "METHOD"
    if text[0].isupper() and (
        nxt in (".", "<") or _IDENT_RE.match(nxt) or prev in _TYPE_CONTEXT_BEFORE
    ):
        return "TYPE"
    return "VAR"


def abstract_tokens(tokens: Sequence[str], mapping: AbstractionMap) -> list[str]:
    out = []
    for i, text in enumerate(tokens):
        category = _classify(tokens, i)
        out.append(mapping.assign(text, category) if category else text)
    return out


def abstract_pair(
    prior: Sequence[str], updated: Sequence[str]
) -> tuple[list[str], list[str], AbstractionMap]:
    """Abstract both versions of a pair under one shared map.

    The map is built scanning prior first, then updated, so IDs of tokens
    already present in the prior version are stable across versions.
    """
    mapping = AbstractionMap()
    abs_prior = abstract_tokens(prior, mapping)
    abs_updated = abstract_tokens(updated, mapping)
    return abs_prior, abs_updated, mapping


def deabstract(abs_tokens: Sequence[str], mapping: AbstractionMap) -> list[str]:
    """Replace every CAT_N token via the backward map.

    Raises UnmappableToken for an ID with no entry; such IDs are exactly
    the "new token" failure mode of abstraction-based generation.
    """
    out = []
    for text in abs_tokens:
        if is_abstract_id(text):
            if text not in mapping.backward:
                raise UnmappableToken(text)
            out.append(mapping.backward[text])
        else:
            out.append(text)
    return out
