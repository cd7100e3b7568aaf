"""Planted two-block graphs shared by the GAE, clustering and acceptance tests."""

import numpy as np

from gaeisumm.graph import WeightedGraph, normalize_adjacency
from gaeisumm.numerics import make_rng


def block_affinity(n=20, within=0.9, across=0.05):
    half = n // 2
    labels = np.array([0] * half + [1] * (n - half))
    W = np.where(labels[:, None] == labels[None, :], within, across)
    np.fill_diagonal(W, 0.0)
    return W, labels


def block_graph(n=20, within=0.9, across=0.05):
    W, labels = block_affinity(n, within, across)
    return WeightedGraph(W, normalize_adjacency(W)), labels


def block_features(labels, seed, dim=20, noise=0.3):
    """Unit-norm node features: one shared direction per block plus noise."""
    rng = make_rng(seed, 11)
    centers = rng.standard_normal((2, dim))
    X = centers[labels] + noise * rng.standard_normal((len(labels), dim))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


def gae_planted_run(seed, lr=1e-3, epochs=40, latent_dim=128):
    """Initial and final reconstruction loss plus the monotone-step fraction."""
    from gaeisumm.gae import train_gae

    g, labels = block_graph()
    X = block_features(labels, seed)
    _, _, trace = train_gae(g, X, lr, epochs, seed, latent_dim)
    steps = np.diff(trace)
    return trace[0], trace[-1], float(np.mean(steps <= 0)), trace


def partition(labels):
    """Label vector as a set of member sets, so relabelings compare equal."""
    groups = {}
    for i, lab in enumerate(labels):
        groups.setdefault(lab, set()).add(i)
    return {frozenset(g) for g in groups.values()}


def brute_force_ncut(W):
    """Best two-way normalized cut of a small affinity, by exhaustive search."""
    import itertools

    n = W.shape[0]
    deg = W.sum(axis=1)
    best, best_part = np.inf, None
    for r in range(1, n // 2 + 1):
        for side in itertools.combinations(range(n), r):
            mask = np.zeros(n, bool)
            mask[list(side)] = True
            cut = W[mask][:, ~mask].sum()
            value = cut / deg[mask].sum() + cut / deg[~mask].sum()
            if value < best - 1e-12:
                best, best_part = value, mask.astype(int)
    return best_part, best


def noisy_blocks(seed, sizes=(4, 4), within=(0.6, 1.0), across=(0.0, 0.2)):
    rng = make_rng(seed, 12)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = len(labels)
    same = labels[:, None] == labels[None, :]
    W = np.where(same, rng.uniform(*within, (n, n)), rng.uniform(*across, (n, n)))
    W = np.triu(W, 1)
    return W + W.T
