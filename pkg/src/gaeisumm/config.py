"""Run configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # None means: 128 for inputs of dimension <= 300, 256 otherwise
    latent_dim: int | None = None
    # None means: same as the latent dimension
    attention_dim: int | None = None
    n_clusters: int = 3
    # None means: same as n_clusters
    top_k: int | None = None
    alpha: float = 0.6
    beta: float = 0.4
    margin: float = 1.0
    n_negatives: int = 4
    lr_doc: float = 0.001
    lr_sent: float = 0.0005
    epochs_doc: int = 40
    epochs_sent: int = 40
    seed: int = 0
    decoder: str = "inner"
    normalization: str = "softmax"
    no_clustering: bool = False
    no_position: bool = False
    no_gae_sent: bool = False
    no_gae_doc: bool = False
    min_edge_weight: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0 and 0.0 <= self.beta <= 1.0):
            raise ConfigError("alpha and beta must lie in [0, 1]")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ConfigError(f"alpha + beta must equal 1, got {self.alpha} + {self.beta}")
        if self.epochs_doc < 1 or self.epochs_sent < 1:
            raise ConfigError("epochs must be >= 1")
        if self.lr_doc <= 0 or self.lr_sent <= 0:
            raise ConfigError("learning rates must be > 0")
        if self.margin <= 0:
            raise ConfigError("margin must be > 0")
        if self.n_clusters < 1:
            raise ConfigError("n_clusters must be >= 1")
        if self.top_k is not None and self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.n_negatives < 0:
            raise ConfigError("n_negatives must be >= 0")
        for name in ("latent_dim", "attention_dim"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.decoder not in ("inner", "gcn"):
            raise ConfigError(f"decoder must be 'inner' or 'gcn', got {self.decoder!r}")
        if self.normalization not in ("softmax", "literal"):
            raise ConfigError(f"normalization must be 'softmax' or 'literal', got {self.normalization!r}")
        if not 0.0 <= self.min_edge_weight <= 1.0:
            raise ConfigError("min_edge_weight must lie in [0, 1]")

    @property
    def k(self) -> int:
        return self.n_clusters if self.top_k is None else self.top_k

    @property
    def weights(self) -> tuple[float, float]:
        """Effective (alpha, beta) after the no-position ablation."""
        return (1.0, 0.0) if self.no_position else (self.alpha, self.beta)

    def latent_for(self, input_dim: int) -> int:
        if self.latent_dim is not None:
            return self.latent_dim
        return 128 if input_dim <= 300 else 256

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **changes) -> "RunConfig":
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return RunConfig.from_dict(d)


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return RunConfig.from_dict(data)
