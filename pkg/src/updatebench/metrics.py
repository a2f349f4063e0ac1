"""Scoring: Perfect Prediction @k, BLEU-4, CodeBLEU, and run evaluation.

All comparisons operate on detokenized token sequences, so scores are
whitespace-insensitive by construction. CodeBLEU combines four weighted
components: plain BLEU, keyword-weighted BLEU, a bracket-skeleton subtree
match (identifier- and literal-insensitive) and a def-use dataflow match.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .classify import UpdateType, classify
from .corpusio import read_candidates, read_jsonl
from .errors import AlignmentError
from .javalite import KEYWORDS
from .mining import changed_token_count

METHOD_SIZE_EDGES = [0, 50, 100, 150, 200]
UPDATE_SIZE_EDGES = [0, 5, 10, 15, 20, 25]
KEYWORD_WEIGHT = 5.0


@dataclass
class CandidateSet:
    example_id: str
    candidates: list[list[str]]

    def __post_init__(self):
        if not self.candidates:
            # placeholder rows (e.g. an adapter that failed on one example)
            # count as a single empty candidate
            self.candidates = [[]]


@dataclass
class EvalReport:
    per_k: dict[int, dict[str, float]]
    per_type: dict[str, float | None]
    per_bucket: dict[str, dict[str, float | None]]
    counts: dict[str, object]
    flags: dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_k": {str(k): v for k, v in self.per_k.items()},
            "per_type": self.per_type,
            "per_bucket": self.per_bucket,
            "counts": self.counts,
            "flags": self.flags,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            per_k={int(k): v for k, v in d["per_k"].items()},
            per_type=d["per_type"],
            per_bucket=d["per_bucket"],
            counts=d["counts"],
            flags=d.get("flags", {}),
        )


# ---------------------------------------------------------------------------
# perfect prediction


def perfect_prediction(candidates: CandidateSet, reference: Sequence[str], k: int) -> bool:
    """True iff one of the first k candidates equals the reference exactly."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ref = list(reference)
    return any(list(c) == ref for c in candidates.candidates[:k])


# ---------------------------------------------------------------------------
# BLEU-4


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _match_totals(candidate, reference, n, weights=None):
    cand = _ngrams(candidate, n)
    ref = _ngrams(reference, n)
    if weights is None:
        matched = sum(min(c, ref.get(g, 0)) for g, c in cand.items())
        total = sum(cand.values())
    else:
        matched = sum(weights(g) * min(c, ref.get(g, 0)) for g, c in cand.items())
        total = sum(weights(g) * c for g, c in cand.items())
    return matched, total


def _geometric_bleu(stats, cand_len, ref_len) -> float:
    """stats: per-n (matched, total). Add-one smoothing applies only to
    zero-count precisions; brevity penalty exp(1 - r/c) when c < r."""
    log_sum = 0.0
    for matched, total in stats:
        if matched == 0:
            p = (matched + 1.0) / (total + 1.0)
        else:
            p = matched / total
        log_sum += math.log(p)
    if cand_len == 0:
        return 0.0
    bp = 1.0 if cand_len >= ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum / len(stats))


def bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    if not candidate:
        return 0.0
    stats = [_match_totals(candidate, reference, n) for n in range(1, 5)]
    return _geometric_bleu(stats, len(candidate), len(reference))


def corpus_bleu4(pairs: Sequence[tuple[Sequence[str], Sequence[str]]]) -> float:
    """Corpus BLEU: n-gram counts are pooled over all pairs before the
    geometric mean; lengths pool into one brevity penalty."""
    totals = [[0, 0] for _ in range(4)]
    cand_len = ref_len = 0
    for candidate, reference in pairs:
        cand_len += len(candidate)
        ref_len += len(reference)
        for i, n in enumerate(range(1, 5)):
            m, t = _match_totals(candidate, reference, n)
            totals[i][0] += m
            totals[i][1] += t
    return _geometric_bleu([tuple(t) for t in totals], cand_len, ref_len)


def weighted_bleu4(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """BLEU-4 whose unigram precision weighs Java keywords 5:1."""
    if not candidate:
        return 0.0

    def w(gram):
        return KEYWORD_WEIGHT if gram[0] in KEYWORDS else 1.0

    stats = [_match_totals(candidate, reference, 1, weights=w)]
    stats += [_match_totals(candidate, reference, n) for n in range(2, 5)]
    return _geometric_bleu(stats, len(candidate), len(reference))


# ---------------------------------------------------------------------------
# CodeBLEU structural components

_IDENT_RE = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")
_OPENERS = {"(": ")", "[": "]", "{": "}"}
_CLOSERS = {")", "]", "}"}


def _leaf_label(text: str) -> str:
    """Structure-relevant label: identifiers and literals collapse to
    their kind so renamings do not perturb the skeleton."""
    if text in KEYWORDS:
        return text
    if text.startswith('"'):
        return "#STR"
    if text.startswith("'"):
        return "#CHAR"
    if text[:1].isdigit() or (text[:1] == "." and text[1:2].isdigit()):
        return "#NUM"
    if _IDENT_RE.match(text) or text.startswith("@"):
        return "#ID"
    return text


def parse_skeleton(tokens: Sequence[str]):
    """Bracket-nesting tree over kind-collapsed leaves, or None when the
    brackets do not balance."""
    root: list = ["<root>"]
    stack = [root]
    expected: list[str] = []
    for text in tokens:
        if text in _OPENERS:
            node: list = [text]
            stack[-1].append(node)
            stack.append(node)
            expected.append(_OPENERS[text])
        elif text in _CLOSERS:
            if not expected or text != expected.pop():
                return None
            stack.pop()
        else:
            stack[-1].append(_leaf_label(text))
    if expected:
        return None
    return root


def _subtree_signatures(node, acc: Counter):
    signature = tuple(
        _subtree_signatures(child, acc) if isinstance(child, list) else child
        for child in node
    )
    acc[signature] += 1
    return signature


def ast_match(candidate: Sequence[str], reference: Sequence[str]) -> float | None:
    """Ratio of reference skeleton subtrees reproduced by the candidate;
    None when the candidate does not parse."""
    cand_tree = parse_skeleton(candidate)
    ref_tree = parse_skeleton(reference)
    if cand_tree is None or ref_tree is None:
        return None
    cand_counts: Counter = Counter()
    ref_counts: Counter = Counter()
    _subtree_signatures(cand_tree, cand_counts)
    _subtree_signatures(ref_tree, ref_counts)
    matched = sum(min(c, cand_counts.get(sig, 0)) for sig, c in ref_counts.items())
    return matched / sum(ref_counts.values())


_ASSIGN_OPS = frozenset(["=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="])


def dataflow_pairs(tokens: Sequence[str]) -> Counter:
    """Def-use pairs from a linear assignment/use scan.

    Variables are normalized by first-appearance order; each use pairs
    with the ordinal of the latest assignment to that variable seen so
    far (0 = external/initial value)."""
    order: dict[str, int] = {}
    defs_seen: dict[str, int] = {}
    pairs: Counter = Counter()
    n = len(tokens)
    for i, text in enumerate(tokens):
        if not _IDENT_RE.match(text) or text in KEYWORDS:
            continue
        nxt = tokens[i + 1] if i + 1 < n else ""
        prev = tokens[i - 1] if i > 0 else ""
        if nxt == "(" or prev == ".":
            continue  # method name or member access, not a plain variable
        var = order.setdefault(text, len(order))
        if nxt in _ASSIGN_OPS:
            defs_seen[text] = defs_seen.get(text, 0) + 1
        else:
            pairs[(var, defs_seen.get(text, 0))] += 1
    return pairs


def dataflow_match(candidate: Sequence[str], reference: Sequence[str]) -> float:
    ref_pairs = dataflow_pairs(reference)
    if not ref_pairs:
        return 1.0
    cand_pairs = dataflow_pairs(candidate)
    matched = sum(min(c, cand_pairs.get(p, 0)) for p, c in ref_pairs.items())
    return matched / sum(ref_pairs.values())


def codebleu(
    candidate: Sequence[str],
    reference: Sequence[str],
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> tuple[float, dict[str, object]]:
    if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    alpha, beta, gamma, delta = weights
    bleu = bleu4(candidate, reference)
    wbleu = weighted_bleu4(candidate, reference)
    ast = ast_match(candidate, reference)
    parse_failed = ast is None
    if parse_failed:
        ast = 0.0
        flow = 0.0
    else:
        flow = dataflow_match(candidate, reference)
    components = {
        "bleu": bleu,
        "weighted_bleu": wbleu,
        "ast_match": ast,
        "dataflow_match": flow,
        "parse_failed": parse_failed,
    }
    score = alpha * bleu + beta * wbleu + gamma * ast + delta * flow
    return score, components


# ---------------------------------------------------------------------------
# bucketing


def _bucket_label(value: int, edges: list[int]) -> str:
    for lo, hi in zip(edges, edges[1:]):
        if lo <= value < hi:
            return f"{lo}-{hi}"
    return f"{edges[-1]}+"


def method_size_buckets() -> list[str]:
    labels = [f"{lo}-{hi}" for lo, hi in zip(METHOD_SIZE_EDGES, METHOD_SIZE_EDGES[1:])]
    return labels + [f"{METHOD_SIZE_EDGES[-1]}+"]


def update_size_buckets() -> list[str]:
    labels = [f"{lo}-{hi}" for lo, hi in zip(UPDATE_SIZE_EDGES, UPDATE_SIZE_EDGES[1:])]
    return labels + [f"{UPDATE_SIZE_EDGES[-1]}+"]


def bucketize(prior: Sequence[str], updated: Sequence[str]) -> tuple[str, str]:
    """(method-size bucket, update-size bucket); bounds are [lo, hi)."""
    return (
        _bucket_label(len(prior), METHOD_SIZE_EDGES),
        _bucket_label(changed_token_count(prior, updated), UPDATE_SIZE_EDGES),
    )


# ---------------------------------------------------------------------------
# run evaluation


def evaluate_examples(
    rows: Sequence[tuple[CandidateSet, dict]],
    ks: Sequence[int],
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> EvalReport:
    """rows: (candidate set, reference record) pairs, already aligned.
    Reference records are triplet dicts (prior/updated/message)."""
    ks = sorted(set(ks))
    if not ks or ks[0] < 1:
        raise ValueError("ks must contain integers >= 1")
    k_max = ks[-1]
    pp_hits = {k: 0 for k in ks}
    rank1_pairs = []
    codebleu_scores = []
    parse_failures = 0
    type_totals: Counter = Counter()
    type_hits: Counter = Counter()
    bucket_totals: Counter = Counter()
    bucket_hits: Counter = Counter()
    for cand_set, ref in rows:
        reference = list(ref["updated"])
        prior = list(ref["prior"])
        for k in ks:
            if perfect_prediction(cand_set, reference, k):
                pp_hits[k] += 1
        rank1 = list(cand_set.candidates[0])
        rank1_pairs.append((rank1, reference))
        score, components = codebleu(rank1, reference, weights)
        codebleu_scores.append(score)
        parse_failures += bool(components["parse_failed"])
        hit_at_max = perfect_prediction(cand_set, reference, k_max)
        update_type = classify(ref.get("message", "")).value
        type_totals[update_type] += 1
        type_hits[update_type] += hit_at_max
        bucket = bucketize(prior, list(ref["updated"]))
        bucket_totals[bucket] += 1
        bucket_hits[bucket] += hit_at_max
    n = len(rows)
    if n == 0:
        raise ValueError("no examples to evaluate")
    corpus_bleu = corpus_bleu4(rank1_pairs)
    mean_codebleu = sum(codebleu_scores) / n
    per_k = {
        k: {"pp_rate": pp_hits[k] / n, "bleu": corpus_bleu, "codebleu": mean_codebleu}
        for k in ks
    }
    per_type = {
        t.value: (type_hits[t.value] / type_totals[t.value]) if type_totals[t.value] else None
        for t in UpdateType
    }
    per_bucket: dict[str, dict[str, float | None]] = {}
    for mb in method_size_buckets():
        per_bucket[mb] = {}
        for ub in update_size_buckets():
            total = bucket_totals[(mb, ub)]
            per_bucket[mb][ub] = (bucket_hits[(mb, ub)] / total) if total else None
    counts = {
        "examples": n,
        "per_type": {t.value: type_totals[t.value] for t in UpdateType},
        "per_bucket": {f"{mb}|{ub}": c for (mb, ub), c in sorted(bucket_totals.items())},
    }
    return EvalReport(
        per_k=per_k,
        per_type=per_type,
        per_bucket=per_bucket,
        counts=counts,
        flags={"rank1_parse_failures": parse_failures, "pp_at_k": {str(k): pp_hits[k] for k in ks}},
    )


def evaluate_run(
    candidates_file,
    references_file,
    ks: Sequence[int],
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25),
) -> EvalReport:
    """Score a candidates JSONL against a reference dataset JSONL.

    Files align on example_id; ids missing from either side raise
    AlignmentError naming them.
    """
    candidates = read_candidates(candidates_file)
    references = {}
    for rec in read_jsonl(references_file):
        eid = rec.get("example_id")
        if eid is None:
            from .corpusio import example_id, triplet_from_dict

            eid = example_id(triplet_from_dict(rec))
        if eid in references:
            raise AlignmentError(f"duplicate example_id {eid} in references", [eid])
        references[eid] = rec
    missing_refs = sorted(set(candidates) - set(references))
    missing_cands = sorted(set(references) - set(candidates))
    if missing_refs or missing_cands:
        raise AlignmentError(
            f"{len(missing_refs)} candidate ids lack references, "
            f"{len(missing_cands)} reference ids lack candidates",
            missing_refs + missing_cands,
        )
    rows = [
        (CandidateSet(eid, candidates[eid]), references[eid])
        for eid in sorted(references)
    ]
    return evaluate_examples(rows, ks, weights)
