"""Synthetic-corpus benchmark shared by the experiment scripts and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .corpus import fallback_embed
from .numerics import make_rng
from .pipeline import run_pipeline
from .rouge import baseline_lexrank, corpus_mean, score
from .synthetic import make_corpus_with_truth, random_selection

_RANDOM_STREAM = 99


@dataclass
class BenchmarkRow:
    seed: int
    variant: str
    random_r1: float
    lexrank_r1: float
    model_r1: float
    topic_hits: int
    topic_total: int


def _mean_r1(records, selections) -> float:
    pairs = (score(" ".join(r.sentences[i] for i in sel), r.reference_summary)
             for r, sel in zip(records, selections))
    return corpus_mean(list(pairs)).r1


def run_synthetic(seed: int, variant: str = "default", n_docs: int = 20, n_sent: int = 12,
                  **overrides) -> BenchmarkRow:
    """Random, LexRank and model corpus ROUGE-1 on one generated corpus."""
    cfg = RunConfig(seed=seed).replace(**overrides)
    records, truth = make_corpus_with_truth(n_docs, n_sent, 3, seed, variant)
    records = fallback_embed(records, seed)
    k = cfg.k
    rng = make_rng(seed, _RANDOM_STREAM)
    rnd = _mean_r1(records, [random_selection(len(r.sentences), k, rng) for r in records])
    lex = _mean_r1(records, [baseline_lexrank(r.embeddings, k) for r in records])
    result = run_pipeline(records, cfg)
    hits = sum(len(set(s.selected) & set(t)) for s, t in zip(result.summaries, truth))
    return BenchmarkRow(seed, variant, rnd, lex, result.corpus_mean.r1, hits,
                        sum(len(t) for t in truth))


def seed_average(rows) -> dict[str, float]:
    return {
        "random_r1": float(np.mean([r.random_r1 for r in rows])),
        "lexrank_r1": float(np.mean([r.lexrank_r1 for r in rows])),
        "model_r1": float(np.mean([r.model_r1 for r in rows])),
    }
