"""ROUGE-1/2/L F1 and a continuous LexRank baseline."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .graph import cosine_matrix


@dataclass(frozen=True)
class RougeScore:
    r1: float
    r2: float
    rl: float

    def as_dict(self) -> dict:
        return {"r1": self.r1, "r2": self.r2, "rl": self.rl}


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Whitespace split, then strip punctuation from both ends of each token.

    Works on any script; only Unicode punctuation categories are removed, so
    combining marks in Indic scripts stay attached to their tokens.
    """
    out = []
    for tok in text.split():
        i, j = 0, len(tok)
        while i < j and _is_punct(tok[i]):
            i += 1
        while j > i and _is_punct(tok[j - 1]):
            j -= 1
        if i < j:
            out.append(tok[i:j])
    return out


def _f1(overlap: float, n_cand: int, n_ref: int) -> float:
    if n_cand == 0 or n_ref == 0 or overlap == 0:
        return 0.0
    p = overlap / n_cand
    r = overlap / n_ref
    return 2 * p * r / (p + r)


def ngrams(tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate, reference, n: int = 1) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    c, r = ngrams(list(candidate), n), ngrams(list(reference), n)
    overlap = sum((c & r).values())
    return _f1(overlap, sum(c.values()), sum(r.values()))


def lcs_length(a, b) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate, reference) -> float:
    candidate, reference = list(candidate), list(reference)
    return _f1(lcs_length(candidate, reference), len(candidate), len(reference))


def score(candidate: str, reference: str) -> RougeScore:
    c, r = tokenize(candidate), tokenize(reference)
    return RougeScore(rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_l(c, r))


def corpus_mean(scores) -> RougeScore:
    scores = list(scores)
    if not scores:
        return RougeScore(0.0, 0.0, 0.0)
    return RougeScore(float(np.mean([s.r1 for s in scores])),
                      float(np.mean([s.r2 for s in scores])),
                      float(np.mean([s.rl for s in scores])))


def lexrank_scores(embeddings, damping: float = 0.85, tol: float = 1e-8,
                   max_iter: int = 100) -> np.ndarray:
    """Stationary distribution of the damped random walk on clamped cosines."""
    S = np.maximum(cosine_matrix(embeddings), 0.0)
    n = S.shape[0]
    T = S / S.sum(axis=1, keepdims=True)
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = (1.0 - damping) / n + damping * (T.T @ p)
        done = np.abs(nxt - p).sum() < tol
        p = nxt
        if done:
            break
    return p


def baseline_lexrank(embeddings, K: int) -> list[int]:
    if K < 1:
        raise ValueError("K must be >= 1")
    p = lexrank_scores(embeddings)
    # round so exact symmetry ties are not decided by float noise
    key = np.round(p, 12)
    order = sorted(range(len(p)), key=lambda i: (-key[i], i))
    return sorted(order[:K])
