"""Cluster-aware sentence scoring, top-K selection and joint training.

Per document: sentence graph -> GAE latents Z -> spectral clusters -> a GRU
over each cluster (document order) gives a cluster embedding C -> attention
relevance ``f = ω·tanh(W1 z + W2 C)`` normalized within the cluster -> mixed
with a position prior -> top-K. Training pulls the relevance-weighted mean of
the selected latents toward the document's latent from the document-level GAE
(contrastive loss) while keeping the sentence GAE's reconstruction loss low.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import gae
from .clustering import ClusterAssignment, spectral_cluster
from .config import RunConfig
from .graph import WeightedGraph, build_adjacency
from .numerics import (
    DegenerateInputError,
    DimensionError,
    NumericError,
    ParamTensor,
    adam_step,
    as_matrix,
    glorot_uniform,
    make_rng,
    sigmoid,
    softmax_backward,
)

log = logging.getLogger(__name__)

GRU_NAMES = ("Wz", "Uz", "bz", "Wr", "Ur", "br", "Wh", "Uh", "bh")
_INIT_STREAM = 202
_CLUSTER_STREAM = 303
_NEG_STREAM = 404
# floor applied to raw relevance before the literal ratio normalization
LITERAL_FLOOR = 1e-8


@dataclass
class SummarizerParams:
    gru: dict[str, ParamTensor]
    omega: ParamTensor
    W1: ParamTensor
    W2: ParamTensor
    alpha: float = 0.6
    beta: float = 0.4
    margin: float = 1.0
    normalization: str = "softmax"

    def __post_init__(self):
        if abs(self.alpha + self.beta - 1.0) > 1e-9 or min(self.alpha, self.beta) < 0:
            raise ValueError("alpha, beta must be in [0, 1] with alpha + beta = 1")
        P = self.latent_dim
        Q = self.omega.shape[0]
        for name in GRU_NAMES:
            want = (P,) if name.startswith("b") else (P, P)
            if self.gru[name].shape != want:
                raise DimensionError(f"GRU {name} has shape {self.gru[name].shape}, expected {want}")
        if self.W1.shape != (Q, P) or self.W2.shape != (Q, P):
            raise DimensionError(f"W1/W2 must be {(Q, P)}, got {self.W1.shape}, {self.W2.shape}")

    @property
    def latent_dim(self) -> int:
        return self.gru["Wz"].shape[0]

    def tensors(self) -> list[ParamTensor]:
        return [self.gru[n] for n in GRU_NAMES] + [self.omega, self.W1, self.W2]

    def copy(self) -> "SummarizerParams":
        return SummarizerParams({k: v.copy() for k, v in self.gru.items()},
                                self.omega.copy(), self.W1.copy(), self.W2.copy(),
                                self.alpha, self.beta, self.margin, self.normalization)


def init_summarizer(latent_dim: int, attention_dim: int, seed: int, alpha: float = 0.6,
                    beta: float = 0.4, margin: float = 1.0,
                    normalization: str = "softmax") -> SummarizerParams:
    rng = make_rng(seed, _INIT_STREAM)
    P, Q = latent_dim, attention_dim
    gru = {}
    for name in GRU_NAMES:
        if name.startswith("b"):
            gru[name] = ParamTensor(np.zeros(P), name=name)
        else:
            gru[name] = ParamTensor(glorot_uniform(rng, (P, P)), name=name)
    W1 = ParamTensor(glorot_uniform(rng, (Q, P)), name="W1")
    W2 = ParamTensor(glorot_uniform(rng, (Q, P)), name="W2")
    # zero ω: relevance starts uniform within each cluster and is learned
    omega = ParamTensor(np.zeros(Q), name="omega")
    return SummarizerParams(gru, omega, W1, W2, alpha, beta, margin, normalization)


# --- records ---------------------------------------------------------------

@dataclass(frozen=True)
class ScoredSentence:
    index: int
    score_rel: float
    score_pos: float
    score: float
    cluster: int


@dataclass
class SummaryResult:
    selected: list[int]
    K: int
    summary_text: str
    scores: list[ScoredSentence]


# --- building blocks -------------------------------------------------------

def doc_embedding(sentence_embeddings) -> np.ndarray:
    E = np.asarray(sentence_embeddings, dtype=np.float64)
    if E.ndim != 2 or E.shape[0] == 0:
        raise DegenerateInputError("document has no sentences")
    return E.mean(axis=0)


def gru_forward(h_prev, x, p: SummarizerParams):
    """One GRU step. Returns ``(h, cache)``."""
    h_prev = np.asarray(h_prev, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    P = p.latent_dim
    if h_prev.shape != (P,) or x.shape != (P,):
        raise DimensionError(f"GRU expects vectors of length {P}, got {h_prev.shape} and {x.shape}")
    g = {k: v.value for k, v in p.gru.items()}
    z = sigmoid(g["Wz"] @ x + g["Uz"] @ h_prev + g["bz"])
    r = sigmoid(g["Wr"] @ x + g["Ur"] @ h_prev + g["br"])
    rh = r * h_prev
    hc = np.tanh(g["Wh"] @ x + g["Uh"] @ rh + g["bh"])
    h = (1.0 - z) * h_prev + z * hc
    return h, (h_prev, x, z, r, rh, hc)


def gru_step(h_prev, x, p: SummarizerParams) -> np.ndarray:
    return gru_forward(h_prev, x, p)[0]


def gru_backward(cache, dh, p: SummarizerParams):
    """Accumulate GRU weight gradients; returns ``(dh_prev, dx)``."""
    h_prev, x, z, r, rh, hc = cache
    g = p.gru
    dz = dh * (hc - h_prev)
    dhc = dh * z
    dh_prev = dh * (1.0 - z)

    da_h = dhc * (1.0 - hc * hc)
    g["Wh"].grad += np.outer(da_h, x)
    g["Uh"].grad += np.outer(da_h, rh)
    g["bh"].grad += da_h
    dx = g["Wh"].value.T @ da_h
    drh = g["Uh"].value.T @ da_h
    dr = drh * h_prev
    dh_prev += drh * r

    da_z = dz * z * (1.0 - z)
    g["Wz"].grad += np.outer(da_z, x)
    g["Uz"].grad += np.outer(da_z, h_prev)
    g["bz"].grad += da_z
    dx += g["Wz"].value.T @ da_z
    dh_prev += g["Uz"].value.T @ da_z

    da_r = dr * r * (1.0 - r)
    g["Wr"].grad += np.outer(da_r, x)
    g["Ur"].grad += np.outer(da_r, h_prev)
    g["br"].grad += da_r
    dx += g["Wr"].value.T @ da_r
    dh_prev += g["Ur"].value.T @ da_r
    return dh_prev, dx


def cluster_forward(rows, p: SummarizerParams):
    rows = as_matrix(rows, "cluster rows")
    if rows.shape[0] == 0:
        raise DegenerateInputError("empty cluster")
    h = np.zeros(p.latent_dim)
    caches = []
    for x in rows:
        h, c = gru_forward(h, x, p)
        caches.append(c)
    return h, caches


def cluster_embed(rows, p: SummarizerParams) -> np.ndarray:
    """Last GRU hidden state over the cluster's rows (already in document order)."""
    return cluster_forward(rows, p)[0]


def cluster_backward(caches, dC, p: SummarizerParams) -> np.ndarray:
    dh = np.asarray(dC, dtype=np.float64)
    drows = np.zeros((len(caches), p.latent_dim))
    for t in range(len(caches) - 1, -1, -1):
        dh, drows[t] = gru_backward(caches[t], dh, p)
    return drows


def relevance_raw(rows, C, p: SummarizerParams):
    """Raw attention scores ``f`` for the rows of one cluster; returns ``(f, T)``."""
    rows = as_matrix(rows)
    T = np.tanh(rows @ p.W1.value.T + (p.W2.value @ C)[None, :])
    return T @ p.omega.value, T


def normalize_relevance(f, kind: str = "softmax") -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if kind == "softmax":
        e = np.exp(f - f.max())
        return e / e.sum()
    if kind == "literal":
        g = np.maximum(f, LITERAL_FLOOR)
        return g / g.sum()
    raise ValueError(f"unknown normalization {kind!r}")


def normalize_relevance_backward(f, rel, drel, kind: str = "softmax") -> np.ndarray:
    if kind == "softmax":
        return softmax_backward(rel, drel)
    g = np.maximum(f, LITERAL_FLOOR)
    dg = (drel - rel @ drel) / g.sum()
    return dg * (f > LITERAL_FLOOR)


def relevance_scores(rows, C, p: SummarizerParams) -> np.ndarray:
    f, _ = relevance_raw(rows, C, p)
    return normalize_relevance(f, p.normalization)


def relevance_backward(rows, C, T, df, p: SummarizerParams):
    """Backward of ``f = ω·tanh(W1 z + W2 C)``; returns ``(drows, dC)``."""
    rows = as_matrix(rows)
    p.omega.grad += T.T @ df
    dA = (df[:, None] * p.omega.value[None, :]) * (1.0 - T * T)
    p.W1.grad += dA.T @ rows
    dsum = dA.sum(axis=0)
    p.W2.grad += np.outer(dsum, C)
    return dA @ p.W1.value, p.W2.value.T @ dsum


def position_score(P: int, N: int) -> float:
    """Lead prior for the sentence at 1-based position ``P`` of ``N``."""
    if N < 1 or not 1 <= P <= N:
        raise ValueError(f"position {P} out of range for a document of {N} sentences")
    return max(0.5, math.exp(-P / N ** (1.0 / 3.0)))


def combine(score_rel: float, score_pos: float, alpha: float, beta: float) -> float:
    return alpha * score_rel + beta * score_pos


def select_topk(scored: list[ScoredSentence], K: int, sentences=None) -> SummaryResult:
    if K < 1:
        raise ValueError("K must be >= 1")
    ranked = sorted(scored, key=lambda s: (-s.score, s.index))
    selected = sorted(s.index for s in ranked[:K])
    text = ""
    if sentences is not None:
        text = " ".join(sentences[i] for i in selected)
    return SummaryResult(selected, K, text, sorted(scored, key=lambda s: s.index))


def contrastive_loss(summary, z_doc, negatives=(), margin: float = 1.0) -> float:
    return _contrastive(summary, z_doc, negatives, margin)[0]


def contrastive_grad(summary, z_doc, negatives=(), margin: float = 1.0) -> np.ndarray:
    """Gradient of the contrastive loss with respect to ``summary``."""
    return _contrastive(summary, z_doc, negatives, margin)[1]


def _contrastive(summary, z_doc, negatives, margin):
    s = np.asarray(summary, dtype=np.float64)
    z = np.asarray(z_doc, dtype=np.float64)
    if s.shape != z.shape:
        raise DimensionError(f"summary {s.shape} and document {z.shape} dimensions differ")
    if margin <= 0:
        raise ValueError("margin must be > 0")
    diff = s - z
    loss = 0.5 * float(diff @ diff)
    grad = diff.copy()
    negatives = [np.asarray(n, dtype=np.float64) for n in negatives]
    if negatives:
        k = len(negatives)
        for n in negatives:
            if n.shape != s.shape:
                raise DimensionError(f"negative {n.shape} and summary {s.shape} dimensions differ")
            dv = s - n
            d = float(np.sqrt(dv @ dv))
            gap = margin - d
            if gap > 0:
                loss += 0.5 * gap * gap / k
                if d > 0:
                    grad -= (gap / d) * dv / k
    return loss, grad


# --- one document ----------------------------------------------------------

@dataclass
class DocumentPass:
    """Forward state of one document, kept for the backward pass."""
    Z: np.ndarray
    labels: tuple[int, ...]
    scored: list[ScoredSentence]
    selected: list[int]
    rel: np.ndarray
    clusters: list[dict] = field(default_factory=list, repr=False)
    gae_out: gae.GaeOutput | None = None
    summary: np.ndarray | None = None


def score_document(Z, labels, p: SummarizerParams, K: int) -> DocumentPass:
    """Relevance, position and final scores plus top-K for fixed clusters."""
    Z = as_matrix(Z, "Z")
    N = Z.shape[0]
    labels = tuple(int(x) for x in labels)
    if len(labels) != N:
        raise DimensionError(f"{len(labels)} labels for {N} sentences")
    rel = np.zeros(N)
    clusters = []
    for c in sorted(set(labels)):
        idx = [i for i in range(N) if labels[i] == c]
        rows = Z[idx]
        C, caches = cluster_forward(rows, p)
        f, T = relevance_raw(rows, C, p)
        r = normalize_relevance(f, p.normalization)
        rel[idx] = r
        clusters.append(dict(idx=idx, C=C, caches=caches, f=f, T=T, rel=r))
    scored = []
    for i in range(N):
        pos = position_score(i + 1, N)
        scored.append(ScoredSentence(i, float(rel[i]), pos,
                                     combine(float(rel[i]), pos, p.alpha, p.beta), labels[i]))
    selected = select_topk(scored, K).selected
    return DocumentPass(Z, labels, scored, selected, rel, clusters)


def summary_vector(rows, rel, selected) -> np.ndarray:
    """Relevance-weighted mean of the selected rows."""
    w = rel[selected]
    return (w[:, None] * rows[selected]).sum(axis=0) / w.sum()


def summary_vector_backward(rows, rel, selected, s, ds):
    """Returns ``(drows, drel)`` for :func:`summary_vector`."""
    w = rel[selected]
    W = w.sum()
    drows = np.zeros_like(rows)
    drows[selected] = (w / W)[:, None] * ds[None, :]
    drel = np.zeros(rel.shape[0])
    drel[selected] = (rows[selected] - s[None, :]) @ ds / W
    return drows, drel


def backward_document(dp: DocumentPass, p: SummarizerParams, drel, dZ=None) -> np.ndarray:
    """Push ``drel`` through normalization, attention and the GRUs; returns dZ."""
    dZ = np.zeros_like(dp.Z) if dZ is None else dZ.copy()
    for cl in dp.clusters:
        idx = cl["idx"]
        df = normalize_relevance_backward(cl["f"], cl["rel"], drel[idx], p.normalization)
        rows = dp.Z[idx]
        drows, dC = relevance_backward(rows, cl["C"], cl["T"], df, p)
        drows += cluster_backward(cl["caches"], dC, p)
        dZ[idx] += drows
    return dZ


# --- training --------------------------------------------------------------

@dataclass
class DocSelection:
    selected: list[int]
    scores: list[ScoredSentence]
    labels: tuple[int, ...]


@dataclass
class TrainResult:
    params: SummarizerParams
    gae_sent: gae.GaeParams | None
    selections: list[DocSelection]
    trace: list[float]
    best_epoch: int


def cluster_seed(seed: int, doc_index: int) -> int:
    return int(make_rng(seed, _CLUSTER_STREAM, doc_index).integers(2**31))


def latents(X, graph: WeightedGraph, gae_sent: gae.GaeParams | None):
    """Sentence latents: GAE output, or the raw embeddings when ``gae_sent`` is None."""
    if gae_sent is None:
        return as_matrix(X), None
    out = gae.forward(graph, X, gae_sent)
    return out.Z, out


def assign_clusters(Z, cfg: RunConfig, doc_index: int) -> tuple[int, ...]:
    N = Z.shape[0]
    M = min(cfg.n_clusters, N)
    if cfg.no_clustering or M == 1:
        return (0,) * N
    return spectral_cluster(Z, M, cluster_seed(cfg.seed, doc_index)).labels


def run_document(X, graph, gae_sent, p: SummarizerParams, cfg: RunConfig,
                 doc_index: int, labels=None) -> DocumentPass:
    """Inference for one document (also the forward half of a training step)."""
    Z, out = latents(X, graph, gae_sent)
    if labels is None:
        labels = assign_clusters(Z, cfg, doc_index)
    dp = score_document(Z, labels, p, min(cfg.k, Z.shape[0]))
    dp.gae_out = out
    return dp


def document_loss(dp: DocumentPass, X, z_doc, negatives, p: SummarizerParams,
                  use_latent_summary: bool = True) -> float:
    """Reconstruction + contrastive loss for a scored document; stores the summary."""
    rows = dp.Z if use_latent_summary else as_matrix(X)
    dp.summary = summary_vector(rows, dp.rel, dp.selected)
    rec = dp.gae_out.recon_loss if dp.gae_out is not None else 0.0
    return rec + contrastive_loss(dp.summary, z_doc, negatives, p.margin)


def document_backward(dp: DocumentPass, X, z_doc, negatives, p: SummarizerParams,
                      gae_sent: gae.GaeParams | None, use_latent_summary: bool = True) -> None:
    rows = dp.Z if use_latent_summary else as_matrix(X)
    ds = contrastive_grad(dp.summary, z_doc, negatives, p.margin)
    drows, drel = summary_vector_backward(rows, dp.rel, dp.selected, dp.summary, ds)
    dZ = backward_document(dp, p, drel, drows if use_latent_summary else None)
    if gae_sent is not None:
        gae.backward(dp.gae_out, gae_sent, grad_Z=dZ)


def draw_negatives(z_doc_table, doc_index: int, cfg: RunConfig, epoch: int):
    n_docs = len(z_doc_table)
    others = [j for j in range(n_docs) if j != doc_index]
    if not others or cfg.n_negatives == 0:
        return []
    rng = make_rng(cfg.seed, _NEG_STREAM, epoch, doc_index)
    k = min(cfg.n_negatives, len(others))
    picks = sorted(rng.choice(len(others), size=k, replace=False).tolist())
    return [z_doc_table[others[i]] for i in picks]


def train(docs, z_doc_table, cfg: RunConfig, gae_sent: gae.GaeParams | None = None,
          params: SummarizerParams | None = None, graphs=None, ids=None) -> TrainResult:
    """Joint training over the corpus with full-batch Adam per epoch.

    Each epoch runs every document with the epoch-start parameters, sums the
    per-document losses (canonical order), and applies one Adam step. The
    returned parameters and selections are the snapshot from the epoch with the
    lowest total loss. ``ids`` only labels error messages.
    """
    docs = [as_matrix(X, "embeddings") for X in docs]
    if not docs:
        raise DegenerateInputError("no documents")
    if len(z_doc_table) != len(docs):
        raise DimensionError(f"{len(z_doc_table)} document latents for {len(docs)} documents")
    if graphs is None:
        graphs = [build_adjacency(X, cfg.min_edge_weight) for X in docs]
    use_latent = not cfg.no_gae_doc
    if params is None:
        P = gae_sent.latent_dim if gae_sent is not None else docs[0].shape[1]
        alpha, beta = cfg.weights
        params = init_summarizer(P, cfg.attention_dim or P, cfg.seed, alpha, beta,
                                 cfg.margin, cfg.normalization)
    trainable = params.tensors() + (gae_sent.tensors() if gae_sent is not None else [])

    best = (math.inf, -1, None, None, None)
    trace = []
    for epoch in range(cfg.epochs_sent):
        total = 0.0
        selections = []
        for d, X in enumerate(docs):
            dp = run_document(X, graphs[d], gae_sent, params, cfg, d)
            negs = draw_negatives(z_doc_table, d, cfg, epoch)
            loss = document_loss(dp, X, z_doc_table[d], negs, params, use_latent)
            if not math.isfinite(loss):
                name = repr(ids[d]) if ids is not None else str(d)
                raise NumericError(f"non-finite loss for document {name} at epoch {epoch}")
            total += loss
            document_backward(dp, X, z_doc_table[d], negs, params, gae_sent, use_latent)
            selections.append(DocSelection(dp.selected, dp.scored, dp.labels))
        trace.append(total)
        log.debug("joint epoch %d loss %.6f", epoch, total)
        if total < best[0]:
            best = (total, epoch, params.copy(),
                    gae_sent.copy() if gae_sent is not None else None, selections)
        for t in trainable:
            adam_step(t, cfg.lr_sent)
    _, best_epoch, best_params, best_gae, best_sel = best
    for t in best_params.tensors() + (best_gae.tensors() if best_gae is not None else []):
        t.zero_grad()
    return TrainResult(best_params, best_gae, best_sel, trace, best_epoch)
