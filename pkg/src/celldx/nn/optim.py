"""Adam optimizer with bias correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConsistencyError


@dataclass
class AdamState:
    """First/second moment estimates per parameter plus the step counter."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: dict[str, np.ndarray]) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


@dataclass
class AdamConfig:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConsistencyError(f"adam betas must lie in (0,1), got {self.beta1}, {self.beta2}")


def adam_step(
    weights: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float = 1e-4,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One bias-corrected Adam update over the parameters tracked by ``state``.

    Returns (new_weights, state). The weight store is copied shallowly:
    untouched (non-tracked) tensors are shared, updated ones are fresh
    arrays. ``state`` is updated in place and its step counter advances by
    exactly 1. A gradient must be present for every tracked parameter and
    for nothing else.
    """
    AdamConfig(lr, beta1, beta2, eps)
    missing = state.m.keys() - grads.keys()
    if missing:
        raise ConsistencyError(f"missing gradients for trainable tensors: {sorted(missing)}")
    unknown = grads.keys() - state.m.keys()
    if unknown:
        raise ConsistencyError(f"gradients for untracked tensors: {sorted(unknown)}")
    state.t += 1
    t = state.t
    new_weights = dict(weights)
    for name, g in grads.items():
        w = weights[name]
        if g.shape != w.shape:
            raise ConsistencyError(f"gradient shape {g.shape} != weight shape {w.shape} for {name}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * np.square(g)
        mhat = m / (1.0 - beta1 ** t)
        vhat = v / (1.0 - beta2 ** t)
        new_weights[name] = w - lr * mhat / (np.sqrt(vhat) + eps)
    return new_weights, state
