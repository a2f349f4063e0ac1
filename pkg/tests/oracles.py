"""Independent oracle implementations used by the test suite.

These deliberately repeat the textbook algorithms in the most naive way
possible and never import the implementation paths they are checking.
"""

import math
from collections import Counter


def oracle_bleu(candidate, reference):
    """Reference BLEU-4: list-scan clipped n-gram matching, add-one
    smoothing on zero-count precisions, brevity penalty."""
    if not candidate:
        return 0.0
    logs = []
    for n in (1, 2, 3, 4):
        cand_grams = [tuple(candidate[i : i + n]) for i in range(len(candidate) - n + 1)]
        ref_grams = [tuple(reference[i : i + n]) for i in range(len(reference) - n + 1)]
        matched = 0
        pool = list(ref_grams)
        for g in cand_grams:
            if g in pool:
                pool.remove(g)
                matched += 1
        total = len(cand_grams)
        p = matched / total if matched > 0 else (matched + 1) / (total + 1)
        logs.append(math.log(p))
    bp = 1.0 if len(candidate) >= len(reference) else math.exp(1 - len(reference) / len(candidate))
    return bp * math.exp(sum(logs) / 4)


def levenshtein_oracle(a, b):
    """Full-matrix token edit distance."""
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    return d[n][m]


def reference_bpe_learn(corpus, num_merges, marker="</w>"):
    """Naive BPE trainer: recount all pairs from scratch every round."""
    word_freq = Counter()
    for seq in corpus:
        word_freq.update(seq)
    words = {w: tuple(w) + (marker,) for w in word_freq}
    merges = []
    for _ in range(num_merges):
        counts = Counter()
        for w, freq in word_freq.items():
            syms = words[w]
            for i in range(len(syms) - 1):
                counts[(syms[i], syms[i + 1])] += freq
        candidates = [(c, p) for p, c in counts.items() if c >= 2]
        if not candidates:
            break
        best_count = max(c for c, _ in candidates)
        pair = min(p for c, p in candidates if c == best_count)
        merges.append(pair)
        a, b = pair
        for w in words:
            syms = list(words[w])
            out = []
            i = 0
            while i < len(syms):
                if i < len(syms) - 1 and syms[i] == a and syms[i + 1] == b:
                    out.append(a + b)
                    i += 2
                else:
                    out.append(syms[i])
                    i += 1
            words[w] = tuple(out)
    return merges


def replay_bpe_apply(tokens, model):
    """Apply BPE by literally replaying merges in learned order."""
    out = []
    specials = set(model.specials.values())
    for token in tokens:
        if token in specials:
            out.append(token)
            continue
        syms = list(token) + [model.end_of_word_marker]
        for a, b in model.merges:
            new = []
            i = 0
            while i < len(syms):
                if i < len(syms) - 1 and syms[i] == a and syms[i + 1] == b:
                    new.append(a + b)
                    i += 2
                else:
                    new.append(syms[i])
                    i += 1
            syms = new
        out.extend(syms)
    return out
