"""Synthetic corpora with planted salient sentences.

Every document mixes filler sentences drawn from a shared Zipfian background
vocabulary with "topic" sentences that also carry document-specific salient
tokens. The reference summary is built from those salient tokens, so ROUGE
against it rewards picking the topic sentences.

Variants:
  default     topic sentences at uniformly random positions
  position    topic sentences concentrated in the opening positions
  multitopic  three distinct salient vocabularies per document, each carried by
              at least two topic sentences and its own reference sentence
"""

from __future__ import annotations

import numpy as np

from .corpus import CorpusRecord
from .numerics import make_rng

_SYLLABLES = [c + v for c in "bdfgklmnprstvz" for v in "aeiou"]


def _words(rng, n: int, syllables: int, taken: set[str]) -> list[str]:
    out = []
    while len(out) < n:
        w = "".join(rng.choice(_SYLLABLES, size=syllables))
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


class _Vocab:
    def __init__(self, seed: int, size: int = 400):
        rng = make_rng(seed, 1)
        self.taken: set[str] = set()
        self.background = _words(rng, size, 2, self.taken)
        w = 1.0 / np.arange(1, size + 1)
        self.weights = w / w.sum()

    def draw(self, rng, k: int) -> list[str]:
        idx = rng.choice(len(self.background), size=k, p=self.weights)
        return [self.background[i] for i in idx]


def _sentence(words) -> str:
    return " ".join(words).capitalize() + "."


def make_document(rng, vocab: _Vocab, doc_id: str, n_sent: int = 12, n_topic: int = 3,
                  variant: str = "default", salient_per_sentence: int = 4,
                  filler_len: int = 8, leak: float = 0.0) -> tuple[CorpusRecord, list[int]]:
    """One synthetic document and the sorted indices of its topic sentences."""
    if variant == "multitopic":
        topics = [_words(rng, salient_per_sentence + 1, 3, vocab.taken) for _ in range(3)]
        # a topic needs at least two sentences to form a cluster of its own
        per_topic = max(2, -(-n_topic // 3))
        topic_of = [t for t in range(3) for _ in range(per_topic)]
    else:
        topics = [_words(rng, salient_per_sentence + 1, 3, vocab.taken)]
        topic_of = [0] * n_topic
    n_top = len(topic_of)
    if n_top > n_sent:
        raise ValueError("more topic sentences than sentences")

    if variant == "position":
        early = min(n_sent, n_top + 1)
        slots = sorted(rng.choice(early, size=n_top, replace=False).tolist())
    else:
        slots = sorted(rng.choice(n_sent, size=n_top, replace=False).tolist())
    order = rng.permutation(n_top)

    sentences = [None] * n_sent
    ref_parts = []
    for slot, k in zip(slots, order):
        t = topic_of[k]
        sal = list(rng.choice(topics[t], size=min(salient_per_sentence, len(topics[t])), replace=False))
        words = sal + vocab.draw(rng, filler_len - len(sal))
        words = [words[i] for i in rng.permutation(len(words))]
        sentences[slot] = _sentence(words)
        ref_parts.append((t, sal))
    pool = [w for t in topics for w in t]
    for i in range(n_sent):
        if sentences[i] is None:
            words = vocab.draw(rng, filler_len)
            # documents keep mentioning their own subject outside the key sentences
            if leak > 0 and rng.random() < leak:
                words[int(rng.integers(filler_len))] = pool[int(rng.integers(len(pool)))]
            sentences[i] = _sentence(words)

    if variant == "multitopic":
        ref = [_sentence(topics[t] + vocab.draw(rng, 2)) for t in range(3)]
    else:
        ref = [_sentence(sal + vocab.draw(rng, 1)) for _, sal in ref_parts]
    return CorpusRecord(doc_id, sentences, None, " ".join(ref)), sorted(slots)


def make_corpus(n_docs: int = 20, n_sent: int = 12, n_topic: int = 3, seed: int = 0,
                variant: str = "default", leak: float = 0.0) -> list[CorpusRecord]:
    if variant not in ("default", "position", "multitopic"):
        raise ValueError(f"unknown variant {variant!r}")
    return make_corpus_with_truth(n_docs, n_sent, n_topic, seed, variant, leak)[0]


def make_corpus_with_truth(n_docs: int = 20, n_sent: int = 12, n_topic: int = 3, seed: int = 0,
                           variant: str = "default", leak: float = 0.0):
    """Like :func:`make_corpus` but also returns the planted sentence indices."""
    if variant not in ("default", "position", "multitopic"):
        raise ValueError(f"unknown variant {variant!r}")
    vocab = _Vocab(seed)
    rng = make_rng(seed, 2)
    docs = [make_document(rng, vocab, f"doc{d:03d}", n_sent, n_topic, variant, leak=leak)
            for d in range(n_docs)]
    return [r for r, _ in docs], [t for _, t in docs]


def random_selection(n_sent: int, k: int, rng) -> list[int]:
    return sorted(rng.choice(n_sent, size=min(k, n_sent), replace=False).tolist())
