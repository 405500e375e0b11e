"""AdamW with decoupled weight decay and exponential learning-rate decay.

The learning rate at step t is lr0 * gamma**t (t starts at 0), applied to
both the Adam update and the decay term. Parameters flagged no-decay
(embedding tables) skip the decay term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class OptimHyper:
    lr0: float = 2e-4
    beta1: float = 0.8
    beta2: float = 0.99
    weight_decay: float = 0.01
    gamma: float = 0.999875
    eps: float = 1e-8


@dataclass
class OptimState:
    """Per-parameter moment buffers plus the shared step counter."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adamw_step(
    params: dict[str, Tensor],
    grads: dict[str, np.ndarray],
    state: OptimState,
    hyper: OptimHyper,
    no_decay: frozenset[str] | set[str] = frozenset(),
) -> float:
    """Apply one AdamW update in place; returns the learning rate used."""
    lr = hyper.lr0 * hyper.gamma**state.step
    t = state.step + 1
    bc1 = 1.0 - hyper.beta1**t
    bc2 = 1.0 - hyper.beta2**t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape {g.shape} does not match parameter {name} {p.data.shape}")
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        m *= hyper.beta1
        m += (1.0 - hyper.beta1) * g
        v *= hyper.beta2
        v += (1.0 - hyper.beta2) * (g * g)
        update = (m / bc1) / (np.sqrt(v / bc2) + hyper.eps)
        if hyper.weight_decay != 0.0 and name not in no_decay:
            update = update + hyper.weight_decay * p.data
        p.data -= lr * update
    state.step += 1
    return lr


class AdamW:
    """Stateful wrapper around adamw_step for a fixed parameter dict."""

    def __init__(
        self,
        params: dict[str, Tensor],
        hyper: OptimHyper | None = None,
        no_decay: set[str] | frozenset[str] = frozenset(),
    ):
        self.params = params
        self.hyper = hyper if hyper is not None else OptimHyper()
        self.no_decay = frozenset(no_decay)
        self.state = OptimState()

    @property
    def lr(self) -> float:
        return self.hyper.lr0 * self.hyper.gamma**self.state.step

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    def step(self) -> float:
        grads = {}
        for name, p in self.params.items():
            grads[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
        return adamw_step(self.params, grads, self.state, self.hyper, self.no_decay)
