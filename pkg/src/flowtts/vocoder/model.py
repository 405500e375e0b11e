"""Latent-to-waveform generator with speaker conditioning.

Transposed-convolution upsampling whose stage factors multiply exactly to
the STFT hop, so S latent frames always yield S * hop samples. The
speaker embedding is projected and added to the latent before the stack.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..ndgrad import Tensor, take, tanh
from ..nn import Conv1d, ConvTranspose1d, Linear, Module


@dataclass
class VocoderConfig:
    d_z: int = 16
    d_spk: int = 32
    hop: int = 128
    factors: tuple[int, ...] = (8, 4, 4)
    channels: tuple[int, ...] = (32, 16, 8, 4)  # per stage boundary; len = len(factors) + 1

    def __post_init__(self):
        prod = int(np.prod(self.factors))
        if prod != self.hop:
            raise ValueError(f"upsampling factors {self.factors} multiply to {prod}, need hop {self.hop}")
        if len(self.channels) != len(self.factors) + 1:
            raise ValueError("need one channel count per stage boundary")


class _ResBlock(Module):
    def __init__(self, rng, ch: int, dtype=np.float32):
        super().__init__()
        self.c1 = self.add_module("c1", Conv1d(rng, ch, ch, 3, dilation=1, dtype=dtype))
        self.c2 = self.add_module("c2", Conv1d(rng, ch, ch, 3, dilation=3, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return x + self.c2(tanh(self.c1(x)))


class Vocoder(Module):
    def __init__(self, rng, cfg: VocoderConfig | None = None, dtype=np.float32):
        super().__init__()
        self.cfg = cfg if cfg is not None else VocoderConfig()
        c = self.cfg
        self.spk_proj = self.add_module("spk_proj", Linear(rng, c.d_spk, c.d_z, bias=False, dtype=dtype))
        self.pre = self.add_module("pre", Conv1d(rng, c.d_z, c.channels[0], 3, dtype=dtype))
        self.ups = []
        self.res = []
        for i, f in enumerate(c.factors):
            self.ups.append(self.add_module(
                f"up{i}", ConvTranspose1d(rng, c.channels[i], c.channels[i + 1], 2 * f, f, dtype=dtype)
            ))
            self.res.append(self.add_module(f"res{i}", _ResBlock(rng, c.channels[i + 1], dtype=dtype)))
        self.out = self.add_module("out", Conv1d(rng, c.channels[-1], 1, 7, dtype=dtype))

    def __call__(self, z: Tensor, spk: Tensor) -> Tensor:
        """z (S, d_z), spk (d_spk,) -> waveform (S * hop,)."""
        if z.data.ndim != 2 or z.shape[1] != self.cfg.d_z:
            raise ValueError(f"latent must be (S, {self.cfg.d_z}), got {z.shape}")
        if z.shape[0] < 1:
            raise ValueError("need at least one latent frame")
        if spk.shape != (self.cfg.d_spk,):
            raise ValueError(f"speaker embedding must be ({self.cfg.d_spk},), got {spk.shape}")
        s_rows = take(self.spk_proj(spk.reshape((1, self.cfg.d_spk))), [0] * z.shape[0])
        x = tanh(self.pre(z + s_rows))
        for up, res in zip(self.ups, self.res):
            x = res(tanh(up(x)))
        wav = tanh(self.out(x))
        return wav.reshape((wav.shape[0],))


class Discriminator:
    """Hook for an adversarial critic; the spectral-loss path never calls it.

    Implementations score waveform tensors; the training loop can combine
    scores() with its reconstruction terms without any generator change.
    """

    def scores(self, wav: Tensor) -> list[Tensor]:
        raise NotImplementedError

    def loss_pair(self, real: Tensor, fake: Tensor) -> tuple[Tensor, Tensor]:
        raise NotImplementedError
