"""Stochastic duration model: a conditional flow over log-durations.

Token durations d are lifted to x = log(d + 0.5); a conditional flow maps
x to a standard-normal code u with exact log-det, trained by negative
log-likelihood. At inference the inverse transform turns scaled noise
back into durations via d = ceil(exp(x) - 0.5), clamped to >= 1, which
round-trips the integerization on training-like values.

The flow alternates conditioner-only elementwise affine layers (keeps
length-1 sequences non-degenerate) with parity-masked coupling layers
whose shift/scale nets see the unmasked positions plus the per-token
conditioning (text hidden state, speaker projection, language embedding).
All heads start at zero, so the initial flow is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ndgrad import Tensor, concat, exp as t_exp, take, tanh, tsum
from ..nn import Conv1d, Module

LOG2PI = float(np.log(2.0 * np.pi))
X_CLAMP = 7.0  # |log duration| bound at inversion time; caps durations near e^7 frames


@dataclass
class DurationFlowConfig:
    cond_dim: int
    hidden: int = 16
    n_pairs: int = 2  # each pair = elementwise affine + parity coupling


class _ElementwiseAffine(Module):
    """x -> x * exp(s(c)) + t(c); invertible for any length, including 1."""

    def __init__(self, rng, cond_dim: int, hidden: int, dtype=np.float32):
        super().__init__()
        self.net1 = self.add_module("net1", Conv1d(rng, cond_dim, hidden, 1, dtype=dtype))
        self.head = self.add_module("head", Conv1d(rng, hidden, 2, 1, zero_init=True, dtype=dtype))

    def _st(self, cond: Tensor) -> tuple[Tensor, Tensor]:
        out = self.head(tanh(self.net1(cond)))
        return out[:, 1:], tanh(out[:, :1])

    def forward(self, x: Tensor, cond: Tensor) -> tuple[Tensor, Tensor]:
        t, s = self._st(cond)
        return x * t_exp(s) + t, tsum(s)

    def inverse(self, u: Tensor, cond: Tensor) -> Tensor:
        t, s = self._st(cond)
        return (u - t) * t_exp(-s)


class _ParityCoupling(Module):
    """Transforms positions of one parity from the other parity + conditioning."""

    def __init__(self, rng, cond_dim: int, hidden: int, parity: int, dtype=np.float32):
        super().__init__()
        self.parity = parity
        self.net1 = self.add_module("net1", Conv1d(rng, 1 + cond_dim, hidden, 3, dtype=dtype))
        self.net2 = self.add_module("net2", Conv1d(rng, hidden, hidden, 3, dtype=dtype))
        self.head = self.add_module("head", Conv1d(rng, hidden, 2, 1, zero_init=True, dtype=dtype))

    def _masks(self, length: int, dtype) -> tuple[np.ndarray, np.ndarray]:
        idx = np.arange(length) % 2
        transformed = (idx == self.parity).astype(dtype)[:, None]
        return 1.0 - transformed, transformed  # (keep, transform)

    def _st(self, x_keep: Tensor, cond: Tensor) -> tuple[Tensor, Tensor]:
        h = tanh(self.net1(concat([x_keep, cond], axis=1)))
        out = self.head(tanh(self.net2(h)))
        return out[:, 1:], tanh(out[:, :1])

    def forward(self, x: Tensor, cond: Tensor) -> tuple[Tensor, Tensor]:
        keep, tr = self._masks(x.shape[0], x.dtype)
        k, m = Tensor(keep), Tensor(tr)
        t, s = self._st(x * k, cond)
        y = x * k + (x * t_exp(s) + t) * m
        return y, tsum(s * m)

    def inverse(self, u: Tensor, cond: Tensor) -> Tensor:
        keep, tr = self._masks(u.shape[0], u.dtype)
        k, m = Tensor(keep), Tensor(tr)
        t, s = self._st(u * k, cond)
        return u * k + ((u - t) * t_exp(-s)) * m


class DurationFlow(Module):
    def __init__(self, rng, cfg: DurationFlowConfig, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        self.layers = []
        for p in range(cfg.n_pairs):
            self.layers.append(self.add_module(f"elt{p}", _ElementwiseAffine(rng, cfg.cond_dim, cfg.hidden, dtype)))
            self.layers.append(self.add_module(f"cpl{p}", _ParityCoupling(rng, cfg.cond_dim, cfg.hidden, p % 2, dtype)))

    def forward(self, x: Tensor, cond: Tensor) -> tuple[Tensor, Tensor]:
        """x (L, 1), cond (L, cond_dim) -> (u, total log |du/dx|)."""
        log_det = Tensor(np.zeros((), dtype=x.dtype))
        for layer in self.layers:
            x, ld = layer.forward(x, cond)
            log_det = log_det + ld
        return x, log_det

    def inverse(self, u: Tensor, cond: Tensor) -> Tensor:
        for layer in reversed(self.layers):
            u = layer.inverse(u, cond)
        return u


def build_condition(hidden: Tensor, spk: Tensor, lang_row: Tensor) -> Tensor:
    """Per-token conditioning: [hidden | speaker | language], all (L, *)."""
    length = hidden.shape[0]
    spk_rows = take(spk.reshape((1, spk.shape[-1])), [0] * length)
    lang_rows = take(lang_row.reshape((1, lang_row.shape[-1])), [0] * length)
    return concat([hidden, spk_rows, lang_rows], axis=1)


def duration_nll(durations, hidden: Tensor, spk: Tensor, lang_row: Tensor, flow: DurationFlow) -> Tensor:
    """Joint NLL of the duration vector under the conditional flow.

    -[log N(u; 0, I) + log_det] with u = flow(log(d + 0.5)); gradient
    reaches the flow parameters and the conditioning inputs.
    """
    d = np.asarray(durations, dtype=np.float64)
    if d.ndim != 1 or d.size == 0:
        raise ValueError("durations must be a non-empty 1-D vector")
    if np.any(d <= 0):
        raise ValueError("durations must be positive")
    if d.size != hidden.shape[0]:
        raise ValueError(f"{d.size} durations vs {hidden.shape[0]} tokens")
    dtype = hidden.dtype
    x = Tensor(np.log(d + 0.5).astype(dtype)[:, None])
    cond = build_condition(hidden, spk, lang_row)
    u, log_det = flow.forward(x, cond)
    gauss = 0.5 * tsum(u * u) + 0.5 * LOG2PI * d.size
    return gauss - log_det


def sample_durations(
    hidden: Tensor,
    spk: Tensor,
    lang_row: Tensor,
    flow: DurationFlow,
    noise_scale: float = 0.8,
    rng: np.random.Generator | None = None,
    noise: np.ndarray | None = None,
) -> np.ndarray:
    """Invert scaled noise through the flow; returns integer durations >= 1."""
    if noise_scale < 0:
        raise ValueError("noise_scale must be >= 0")
    length = hidden.shape[0]
    if noise is None:
        gen = rng if rng is not None else np.random.default_rng()
        noise = gen.standard_normal((length, 1))
    noise = np.asarray(noise, dtype=np.float64).reshape(length, 1)
    u = Tensor((noise_scale * noise).astype(hidden.dtype))
    cond = build_condition(hidden, spk, lang_row)
    x = flow.inverse(u, cond).data[:, 0]
    x = np.clip(x, -X_CLAMP, X_CLAMP)
    return np.maximum(np.ceil(np.exp(x) - 0.5), 1.0).astype(np.int64)


def expand_prior(mu: Tensor, log_sigma: Tensor, durations) -> tuple[Tensor, Tensor]:
    """Repeat token-level prior rows per duration -> frame-level (T, d_z)."""
    d = np.asarray(durations, dtype=np.int64)
    if d.ndim != 1 or d.size != mu.shape[0]:
        raise ValueError(f"{d.size} durations vs {mu.shape[0]} prior rows")
    if np.any(d < 1):
        raise ValueError("durations must be >= 1")
    idx = np.repeat(np.arange(d.size), d)
    return take(mu, idx), take(log_sigma, idx)
