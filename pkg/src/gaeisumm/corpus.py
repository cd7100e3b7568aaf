"""Newline-delimited JSON corpus I/O and the hashed TF-IDF fallback embedder."""

from __future__ import annotations

import hashlib
import json
import math
import zlib
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import make_rng
from .rouge import tokenize

FALLBACK_DIM = 300
_FALLBACK_STREAM = 505


class CorpusError(ValueError):
    pass


@dataclass
class CorpusRecord:
    id: str
    sentences: list[str]
    embeddings: np.ndarray | None = None
    reference_summary: str | None = None

    def to_json(self) -> dict:
        d = {"id": self.id, "sentences": list(self.sentences)}
        if self.embeddings is not None:
            d["embeddings"] = self.embeddings.tolist()
        if self.reference_summary is not None:
            d["reference_summary"] = self.reference_summary
        return d


def _record(obj, lineno: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise CorpusError(f"line {lineno}: record must be a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, str):
        raise CorpusError(f"line {lineno}: missing string 'id'")
    sents = obj.get("sentences")
    if not isinstance(sents, list) or not sents or not all(isinstance(s, str) for s in sents):
        raise CorpusError(f"record {rid!r}: 'sentences' must be a non-empty list of strings")
    emb = obj.get("embeddings")
    if emb is not None:
        try:
            emb = np.asarray(emb, dtype=np.float64)
        except (TypeError, ValueError):
            raise CorpusError(f"record {rid!r}: embeddings must be a list of equal-length numeric vectors") from None
        if emb.ndim != 2 or emb.shape[1] == 0:
            raise CorpusError(f"record {rid!r}: embeddings must be a list of equal-length numeric vectors")
        if emb.shape[0] != len(sents):
            raise CorpusError(f"record {rid!r}: {len(sents)} sentences but {emb.shape[0]} embeddings")
        if not np.all(np.isfinite(emb)):
            raise CorpusError(f"record {rid!r}: embeddings contain non-finite values")
    ref = obj.get("reference_summary")
    if ref is not None and not isinstance(ref, str):
        raise CorpusError(f"record {rid!r}: reference_summary must be a string")
    return CorpusRecord(rid, list(sents), emb, ref)


def validate_corpus(records: list[CorpusRecord]) -> list[CorpusRecord]:
    with_emb = [r for r in records if r.embeddings is not None]
    if with_emb and len(with_emb) != len(records):
        missing = next(r.id for r in records if r.embeddings is None)
        raise CorpusError(f"record {missing!r}: embeddings missing while other records have them")
    dims = {r.embeddings.shape[1] for r in with_emb}
    if len(dims) > 1:
        first = with_emb[0].embeddings.shape[1]
        bad = next(r for r in with_emb if r.embeddings.shape[1] != first)
        raise CorpusError(f"record {bad.id!r}: embedding dimension {bad.embeddings.shape[1]} != {first}")
    ids = [r.id for r in records]
    dup = [i for i, c in Counter(ids).items() if c > 1]
    if dup:
        raise CorpusError(f"duplicate record id {dup[0]!r}")
    return records


def load_corpus(path) -> list[CorpusRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusError(f"line {lineno}: malformed JSON ({e.msg})") from None
            records.append(_record(obj, lineno))
    return validate_corpus(records)


def write_corpus(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")


def sentence_features(sentence: str) -> Counter:
    """Word unigrams and boundary-padded character trigrams."""
    feats = Counter()
    for tok in tokenize(sentence.casefold()):
        feats["w:" + tok] += 1
        padded = f"<{tok}>"
        for i in range(len(padded) - 2):
            feats["c:" + padded[i:i + 3]] += 1
    return feats


def bucket(feature: str, dim: int = FALLBACK_DIM) -> int:
    h = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(h, "little") % dim


def fallback_embed(records, seed: int = 0, dim: int = FALLBACK_DIM) -> list[CorpusRecord]:
    """Return copies of ``records`` with hashed TF-IDF sentence embeddings.

    Document frequency counts every sentence of the corpus as one document.
    Sentences without any token get a seeded random unit vector.
    """
    feats = [[sentence_features(s) for s in r.sentences] for r in records]
    n = sum(len(f) for f in feats)
    df = Counter()
    for doc in feats:
        for f in doc:
            df.update(f.keys())
    out = []
    for r, doc in zip(records, feats):
        E = np.zeros((len(doc), dim))
        for i, f in enumerate(doc):
            for feat, tf in f.items():
                E[i, bucket(feat, dim)] += tf * (math.log((1 + n) / (1 + df[feat])) + 1.0)
            norm = np.linalg.norm(E[i])
            if norm == 0.0:
                rng = make_rng(seed, _FALLBACK_STREAM, zlib.crc32(r.id.encode("utf-8")), i)
                v = rng.standard_normal(dim)
                E[i] = v / np.linalg.norm(v)
            else:
                E[i] /= norm
        out.append(CorpusRecord(r.id, list(r.sentences), E, r.reference_summary))
    return out
