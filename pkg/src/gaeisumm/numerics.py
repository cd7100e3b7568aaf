"""Dense float64 primitives, Adam, seeded RNG streams and a gradient checker.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Backward rules
for the model layers live next to their forward passes (``gae``,
``summarizer``); this module only holds the shared pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class DimensionError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class DegenerateInputError(ValueError):
    pass


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    return a


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def matmul_backward(a: np.ndarray, b: np.ndarray, grad_out: np.ndarray):
    """Gradients of ``a @ b`` with respect to ``a`` and ``b``."""
    return grad_out @ b.T, a.T @ grad_out


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def relu(x):
    return np.maximum(np.asarray(x, dtype=np.float64), 0.0)


_ACTIVATIONS = {
    "tanh": (np.tanh, lambda y: 1.0 - y * y),
    "sigmoid": (sigmoid, lambda y: y * (1.0 - y)),
    "relu": (relu, lambda y: (y > 0).astype(np.float64)),
}


def activation(x, kind: str) -> np.ndarray:
    try:
        fn, _ = _ACTIVATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}") from None
    return fn(np.asarray(x, dtype=np.float64))


def activation_grad(y, kind: str) -> np.ndarray:
    """Derivative of the activation expressed through its output ``y``."""
    _, dfn = _ACTIVATIONS[kind]
    return dfn(np.asarray(y, dtype=np.float64))


def softmax_rows(x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape[1] == 0:
        raise DimensionError("softmax needs at least one column")
    e = np.exp(x - x.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def softmax_backward(p: np.ndarray, grad_out: np.ndarray) -> np.ndarray:
    """Row-wise softmax backward given the softmax output ``p``."""
    return p * (grad_out - (p * grad_out).sum(axis=-1, keepdims=True))


@dataclass
class ParamTensor:
    value: np.ndarray
    grad: np.ndarray = field(init=False)
    m: np.ndarray = field(init=False)
    v: np.ndarray = field(init=False)
    step: int = 0
    name: str = ""

    def __post_init__(self):
        self.value = np.array(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)
        self.m = np.zeros_like(self.value)
        self.v = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def copy(self) -> "ParamTensor":
        p = ParamTensor(self.value.copy(), step=self.step, name=self.name)
        p.grad = self.grad.copy()
        p.m = self.m.copy()
        p.v = self.v.copy()
        return p


def adam_step(p: ParamTensor, lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> ParamTensor:
    """In-place bias-corrected Adam update; clears the gradient afterwards."""
    g = p.grad
    if not np.all(np.isfinite(g)):
        raise NumericError(f"non-finite gradient in parameter {p.name or '<unnamed>'}")
    p.step += 1
    p.m = beta1 * p.m + (1.0 - beta1) * g
    p.v = beta2 * p.v + (1.0 - beta2) * g * g
    m_hat = p.m / (1.0 - beta1 ** p.step)
    v_hat = p.v / (1.0 - beta2 ** p.step)
    p.value = p.value - lr * m_hat / (np.sqrt(v_hat) + eps)
    p.zero_grad()
    return p


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed`` and a stream path.

    Distinct stream paths give independent sequences, so per-document draws do
    not depend on processing order.
    """
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(s) for s in stream]])
    return np.random.Generator(np.random.Philox(ss))


def glorot_uniform(rng: np.random.Generator, shape: Sequence[int]) -> np.ndarray:
    fan_in, fan_out = (shape[0], shape[1]) if len(shape) == 2 else (shape[0], 1)
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=tuple(shape))


def grad_check(loss_fn: Callable[[], float], p: ParamTensor, h: float = 1e-5,
               analytic: np.ndarray | None = None) -> float:
    """Worst relative error between ``analytic`` (default ``p.grad``) and
    central differences of ``loss_fn`` over every coordinate of ``p.value``.

    ``loss_fn`` takes no arguments and reads ``p.value``; the value is restored
    afterwards. The relative error is ``|a - n| / max(|a| + |n|, 1e-6)`` so
    coordinates with a vanishing gradient do not blow up the ratio.
    """
    if analytic is None:
        analytic = p.grad
    analytic = np.asarray(analytic, dtype=np.float64)
    worst = 0.0
    flat = p.value.reshape(-1)
    ana = analytic.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = loss_fn()
        flat[i] = orig - h
        down = loss_fn()
        flat[i] = orig
        num = (up - down) / (2.0 * h)
        err = abs(ana[i] - num) / max(abs(ana[i]) + abs(num), 1e-6)
        worst = max(worst, err)
    return worst
