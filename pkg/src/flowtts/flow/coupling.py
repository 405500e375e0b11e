"""Invertible coupling-flow decoder with global speaker conditioning.

A stack of coupling layers over (T, d_z) latents. Each layer flips the
channel order (a fixed, parameter-free, invertible mix), keeps the first
half, and shifts (optionally also scales) the second half by functions of
the first half computed with a stack of gated dilated residual blocks
that receive the speaker embedding as global conditioning. Output heads
are zero-initialized, so a fresh stack is the identity map and log-det 0.

coupling="additive" is volume preserving (log-det identically zero);
coupling="affine" adds a tanh-bounded per-element log-scale whose sum is
the exact log |det J|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ndgrad import Tensor, concat, exp as t_exp, tanh, tsum
from ..nn import Conv1d, GatedResidualStack, Module


@dataclass
class FlowConfig:
    d_z: int = 16
    hidden: int = 32
    d_spk: int = 32
    n_layers: int = 4
    n_blocks: int = 4
    kernel: int = 3
    coupling: str = "additive"  # "additive" | "affine"

    def __post_init__(self):
        if self.d_z % 2:
            raise ValueError(f"d_z must be even for the channel split, got {self.d_z}")
        if self.coupling not in ("additive", "affine"):
            raise ValueError(f"unknown coupling flavor {self.coupling!r}")

    @classmethod
    def paper_scale(cls, d_spk: int = 32) -> "FlowConfig":
        return cls(d_z=192, hidden=192, d_spk=d_spk, n_layers=4, n_blocks=4)


class CouplingLayer(Module):
    def __init__(self, rng, cfg: FlowConfig, dtype=np.float32):
        super().__init__()
        self.cfg = cfg
        half = cfg.d_z // 2
        self.half = half
        out_ch = half if cfg.coupling == "additive" else 2 * half
        self.pre = self.add_module("pre", Conv1d(rng, half, cfg.hidden, 1, dtype=dtype))
        self.wn = self.add_module(
            "wn",
            GatedResidualStack(rng, cfg.hidden, cfg.d_spk, n_blocks=cfg.n_blocks, kernel=cfg.kernel, dtype=dtype),
        )
        self.head = self.add_module("head", Conv1d(rng, cfg.hidden, out_ch, 1, zero_init=True, dtype=dtype))

    def _shift_scale(self, xa: Tensor, spk: Tensor) -> tuple[Tensor, Tensor | None]:
        h = self.wn(self.pre(xa), spk)
        out = self.head(h)
        if self.cfg.coupling == "additive":
            return out, None
        m = out[:, : self.half]
        s = tanh(out[:, self.half :])
        return m, s

    def forward(self, z: Tensor, spk: Tensor) -> tuple[Tensor, Tensor | None]:
        xa = z[:, : self.half]
        xb = z[:, self.half :]
        m, s = self._shift_scale(xa, spk)
        if s is None:
            yb = xb + m
            log_det = None
        else:
            yb = xb * t_exp(s) + m
            log_det = tsum(s)
        return concat([xa, yb], axis=1), log_det

    def inverse(self, y: Tensor, spk: Tensor) -> Tensor:
        ya = y[:, : self.half]
        yb = y[:, self.half :]
        m, s = self._shift_scale(ya, spk)
        if s is None:
            xb = yb - m
        else:
            xb = (yb - m) * t_exp(-s)
        return concat([ya, xb], axis=1)


class FlowStack(Module):
    """Composition of coupling layers; forward maps z -> z_p."""

    def __init__(self, rng, cfg: FlowConfig | None = None, dtype=np.float32):
        super().__init__()
        self.cfg = cfg if cfg is not None else FlowConfig()
        self.layers = [
            self.add_module(f"layer{i}", CouplingLayer(rng, self.cfg, dtype=dtype))
            for i in range(self.cfg.n_layers)
        ]

    def _check(self, z: Tensor, spk: Tensor) -> None:
        if z.data.ndim != 2 or z.shape[1] != self.cfg.d_z:
            raise ValueError(f"latent must be (T, {self.cfg.d_z}), got {z.shape}")
        if spk.shape != (self.cfg.d_spk,):
            raise ValueError(f"speaker embedding must be ({self.cfg.d_spk},), got {spk.shape}")

    def forward(self, z: Tensor, spk: Tensor) -> tuple[Tensor, Tensor]:
        """Returns (z_p, log_det) with log_det the summed per-layer log |det J|."""
        self._check(z, spk)
        log_det = Tensor(np.zeros((), dtype=z.dtype))
        for layer in self.layers:
            z = z[:, ::-1]  # fixed flip permutation between couplings
            z, ld = layer.forward(z, spk)
            if ld is not None:
                log_det = log_det + ld
        return z, log_det

    def inverse(self, z_p: Tensor, spk: Tensor) -> Tensor:
        self._check(z_p, spk)
        for layer in reversed(self.layers):
            z_p = layer.inverse(z_p, spk)
            z_p = z_p[:, ::-1]
        return z_p
