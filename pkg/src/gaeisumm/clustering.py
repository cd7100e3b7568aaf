"""Normalized spectral clustering (Ng, Jordan & Weiss) over latent rows."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import cosine_matrix
from .numerics import as_matrix, make_rng


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]
    M: int

    def members(self, c: int) -> list[int]:
        """Indices of cluster ``c`` in ascending order."""
        return [i for i, lab in enumerate(self.labels) if lab == c]


def affinity(Z) -> np.ndarray:
    W = np.maximum(cosine_matrix(Z), 0.0)
    np.fill_diagonal(W, 0.0)
    return W


def normalized_laplacian(W) -> np.ndarray:
    W = as_matrix(W)
    d = W.sum(axis=1)
    inv = np.zeros_like(d)
    nz = d > 0
    inv[nz] = 1.0 / np.sqrt(d[nz])
    L = np.eye(W.shape[0]) - W * inv[:, None] * inv[None, :]
    return 0.5 * (L + L.T)


def jacobi_eigh(S, tol: float = 1e-14, max_sweeps: int = 100):
    """All eigenpairs of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(values, vectors)`` sorted by ascending eigenvalue, eigenvectors
    in columns.
    """
    A = np.array(as_matrix(S), dtype=np.float64)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"matrix must be square, got {A.shape}")
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > 1e-10 * scale:
        raise ValueError("jacobi_eigh requires a symmetric matrix")
    A = 0.5 * (A + A.T)
    V = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = float(A[p, q])
                if apq == 0.0:
                    continue
                app, aqq = float(A[p, p]), float(A[q, q])
                theta = (aqq - app) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q]
                new_p = c * ap - s * aq
                new_q = s * ap + c * aq
                # symmetric update: rows mirror columns, then fix the 2x2 block
                A[:, p] = new_p
                A[:, q] = new_q
                A[p, :] = new_p
                A[q, :] = new_q
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    vals = np.diag(A).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], V[:, order]


def symmetric_eigensolve(L, k: int):
    """Bottom-``k`` eigenpairs of symmetric ``L``: ``(values, vectors)``."""
    L = as_matrix(L)
    if k < 1 or k > L.shape[0]:
        raise ValueError(f"k must be in [1, {L.shape[0]}], got {k}")
    vals, vecs = jacobi_eigh(L)
    return vals[:k], vecs[:, :k]


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def _plus_plus(X, k, rng):
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = _sqdist(X, X[centers]).min(axis=1)
        total = d2.sum()
        if total <= 0.0:
            rest = [i for i in range(n) if i not in centers]
            centers.append(int(rest[rng.integers(len(rest))]))
        else:
            centers.append(int(rng.choice(n, p=d2 / total)))
    return X[centers].copy()


def kmeans(rows, k: int, seed: int = 0, max_iter: int = 100) -> ClusterAssignment:
    X = as_matrix(rows)
    n = X.shape[0]
    if k < 1 or k > n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    rng = make_rng(seed, 7)
    C = _plus_plus(X, k, rng)
    labels = np.full(n, -1)
    for _ in range(max_iter):
        new = _sqdist(X, C).argmin(axis=1)
        new = _repair_empty(X, new, C, k)
        if np.array_equal(new, labels):
            break
        labels = new
        C = np.stack([X[labels == c].mean(axis=0) for c in range(k)])
    return ClusterAssignment(tuple(int(x) for x in labels), k)


def _repair_empty(X, labels, C, k):
    labels = labels.copy()
    for c in range(k):
        if np.any(labels == c):
            continue
        sizes = np.bincount(labels, minlength=k)
        big = int(sizes.argmax())
        idx = np.flatnonzero(labels == big)
        far = idx[_sqdist(X[idx], C[big:big + 1])[:, 0].argmax()]
        labels[far] = c
    return labels


def spectral_cluster_affinity(W, M: int, seed: int = 0) -> ClusterAssignment:
    W = as_matrix(W)
    n = W.shape[0]
    if M < 1 or M > n:
        raise ValueError(f"cluster count must be in [1, {n}], got {M}")
    if M == 1:
        return ClusterAssignment((0,) * n, 1)
    _, U = symmetric_eigensolve(normalized_laplacian(W), M)
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    U = np.divide(U, norms, out=U.copy(), where=norms > 1e-12)
    return kmeans(U, M, seed)


def spectral_cluster(Z, M: int, seed: int = 0) -> ClusterAssignment:
    return spectral_cluster_affinity(affinity(Z), M, seed)
