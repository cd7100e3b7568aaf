"""One-layer GCN graph autoencoder with explicit backward rules.

Encoder:  Z = tanh(Â X Θ0)
Decoders: inner product  A' = sigmoid(Z Zᵀ)
          gcn            Y = Â Z Θ1,  A' = sigmoid(Y Yᵀ / latent_dim)

The gcn decoder squares its n×latent map by its own transpose so the output
is an n×n symmetric reconstruction like the inner-product one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .graph import WeightedGraph
from .numerics import (
    DimensionError,
    NumericError,
    ParamTensor,
    adam_step,
    as_matrix,
    glorot_uniform,
    make_rng,
    sigmoid,
)

log = logging.getLogger(__name__)

DECODERS = ("inner", "gcn")

# stream id for GAE weight init within make_rng
_INIT_STREAM = 101


@dataclass
class GaeParams:
    theta0: ParamTensor
    theta1: ParamTensor | None = None
    decoder: str = "inner"

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise ValueError(f"decoder must be one of {DECODERS}, got {self.decoder!r}")
        if self.decoder == "gcn" and self.theta1 is None:
            raise ValueError("gcn decoder needs theta1")

    @property
    def latent_dim(self) -> int:
        return self.theta0.shape[1]

    @property
    def input_dim(self) -> int:
        return self.theta0.shape[0]

    def tensors(self) -> list[ParamTensor]:
        return [self.theta0] + ([self.theta1] if self.decoder == "gcn" else [])

    def copy(self) -> "GaeParams":
        return GaeParams(self.theta0.copy(),
                         None if self.theta1 is None else self.theta1.copy(),
                         self.decoder)


@dataclass
class GaeOutput:
    Z: np.ndarray
    A_hat: np.ndarray
    recon_loss: float
    cache: dict = field(default_factory=dict, repr=False)


def init_gae(input_dim: int, latent_dim: int, seed: int, decoder: str = "inner",
             stream: int = 0) -> GaeParams:
    rng = make_rng(seed, _INIT_STREAM, stream)
    theta0 = ParamTensor(glorot_uniform(rng, (input_dim, latent_dim)), name="theta0")
    theta1 = None
    if decoder == "gcn":
        theta1 = ParamTensor(glorot_uniform(rng, (latent_dim, latent_dim)), name="theta1")
    return GaeParams(theta0, theta1, decoder)


def _check_inputs(g: WeightedGraph, X: np.ndarray, p: GaeParams):
    if X.shape[0] != g.n:
        raise DimensionError(f"X has {X.shape[0]} rows but graph has {g.n} nodes")
    if X.shape[1] != p.input_dim:
        raise DimensionError(f"X has {X.shape[1]} columns but theta0 is {p.theta0.shape}")


def encode(g: WeightedGraph, X, p: GaeParams) -> np.ndarray:
    X = as_matrix(X, "X")
    _check_inputs(g, X, p)
    return np.tanh(g.normalized @ X @ p.theta0.value)


def decode(Z, g: WeightedGraph, p: GaeParams) -> np.ndarray:
    Z = as_matrix(Z, "Z")
    if Z.shape[0] != g.n:
        raise DimensionError(f"Z has {Z.shape[0]} rows but graph has {g.n} nodes")
    if p.decoder == "inner":
        return sigmoid(Z @ Z.T)
    Y = g.normalized @ Z @ p.theta1.value
    return sigmoid(Y @ Y.T / p.latent_dim)


def recon_target(g: WeightedGraph) -> np.ndarray:
    """Weighted adjacency with unit self-similarity on the diagonal."""
    return g.adjacency + np.eye(g.n)


def recon_loss(A_hat, target) -> float:
    A_hat = as_matrix(A_hat)
    target = as_matrix(target)
    if A_hat.shape != target.shape:
        raise DimensionError(f"shape mismatch {A_hat.shape} vs {target.shape}")
    return float(np.mean((A_hat - target) ** 2))


def recon_loss_backward(A_hat, target) -> np.ndarray:
    return 2.0 * (A_hat - target) / A_hat.size


def forward(g: WeightedGraph, X, p: GaeParams, target=None) -> GaeOutput:
    X = as_matrix(X, "X")
    _check_inputs(g, X, p)
    H = g.normalized @ X
    Z = np.tanh(H @ p.theta0.value)
    cache = {"H": H, "Z": Z, "g": g}
    if p.decoder == "inner":
        A_hat = sigmoid(Z @ Z.T)
    else:
        AZ = g.normalized @ Z
        Y = AZ @ p.theta1.value
        A_hat = sigmoid(Y @ Y.T / p.latent_dim)
        cache.update(AZ=AZ, Y=Y)
    cache["A_hat"] = A_hat
    if target is None:
        target = recon_target(g)
    cache["target"] = target
    return GaeOutput(Z, A_hat, recon_loss(A_hat, target), cache)


def backward(out: GaeOutput, p: GaeParams, grad_A_hat=None, grad_Z=None) -> None:
    """Accumulate parameter gradients into ``p``.

    ``grad_A_hat`` defaults to the reconstruction-loss gradient; ``grad_Z`` is
    any extra upstream gradient on the latents (e.g. from a downstream head).
    """
    c = out.cache
    A_hat, Z, g = c["A_hat"], c["Z"], c["g"]
    if grad_A_hat is None:
        grad_A_hat = recon_loss_backward(A_hat, c["target"])
    dS = grad_A_hat * A_hat * (1.0 - A_hat)
    dS = dS + dS.T
    if p.decoder == "inner":
        dZ = dS @ Z
    else:
        Y = c["Y"]
        dY = dS @ Y / p.latent_dim
        p.theta1.grad += c["AZ"].T @ dY
        dZ = g.normalized.T @ (dY @ p.theta1.value.T)
    if grad_Z is not None:
        dZ = dZ + grad_Z
    dU = dZ * (1.0 - Z * Z)
    p.theta0.grad += c["H"].T @ dU


def train_gae(g: WeightedGraph, X, lr: float = 1e-3, epochs: int = 40, seed: int = 0,
              latent_dim: int = 128, decoder: str = "inner", stream: int = 0,
              params: GaeParams | None = None):
    """Full-batch Adam on the reconstruction loss.

    Returns ``(params, output, trace)`` where ``trace`` holds the loss before
    each update followed by the final loss (length ``epochs + 1``).
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = as_matrix(X, "X")
    if params is None:
        params = init_gae(X.shape[1], latent_dim, seed, decoder, stream)
    target = recon_target(g)
    trace = []
    for epoch in range(epochs):
        out = forward(g, X, params, target)
        if not np.isfinite(out.recon_loss):
            raise NumericError(f"non-finite reconstruction loss at epoch {epoch}")
        trace.append(out.recon_loss)
        backward(out, params)
        for t in params.tensors():
            adam_step(t, lr)
        log.debug("gae epoch %d loss %.6f", epoch, out.recon_loss)
    out = forward(g, X, params, target)
    if not np.isfinite(out.recon_loss):
        raise NumericError(f"non-finite reconstruction loss at epoch {epochs}")
    trace.append(out.recon_loss)
    return params, out, trace
