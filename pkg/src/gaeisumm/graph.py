"""Cosine-similarity graphs over embedding rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import DegenerateInputError, DimensionError, as_matrix


@dataclass(frozen=True)
class WeightedGraph:
    adjacency: np.ndarray
    normalized: np.ndarray

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64).ravel()
    v = np.asarray(v, dtype=np.float64).ravel()
    if u.shape != v.shape:
        raise DimensionError(f"vector lengths differ: {u.shape[0]} vs {v.shape[0]}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateInputError("cosine similarity of a zero-norm vector")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def cosine_matrix(X) -> np.ndarray:
    """Pairwise cosine similarities of the rows of ``X`` (diagonal included)."""
    X = as_matrix(X)
    norms = np.linalg.norm(X, axis=1)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise DegenerateInputError(f"row {int(bad[0])} has zero norm")
    U = X / norms[:, None]
    S = U @ U.T
    S = 0.5 * (S + S.T)
    return np.clip(S, -1.0, 1.0)


def normalize_adjacency(A) -> np.ndarray:
    """D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I."""
    A = as_matrix(A)
    At = A + np.eye(A.shape[0])
    d = 1.0 / np.sqrt(At.sum(axis=1))
    out = At * d[:, None] * d[None, :]
    return 0.5 * (out + out.T)


def build_adjacency(X, min_edge_weight: float = 0.0) -> WeightedGraph:
    if as_matrix(X).shape[0] < 1:
        raise DegenerateInputError("graph needs at least one node")
    A = np.maximum(cosine_matrix(X), 0.0)
    np.fill_diagonal(A, 0.0)
    if min_edge_weight > 0.0:
        A[A < min_edge_weight] = 0.0
    return WeightedGraph(A, normalize_adjacency(A))
