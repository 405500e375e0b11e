"""Compact trainable speaker encoder.

A small convolutional net over linear-spectrogram frames: log compression,
a 1x1 input projection, two dilated tanh conv blocks, temporal mean pool,
and a linear projection to the embedding dimension. Embeddings are stored
unnormalized; similarity metrics normalize internally.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio.dsp import LinearSpectrogram, magnitude_stft_tensor
from ..errors import DataError
from ..ndgrad import Tensor, log as t_log, no_grad, tanh, tmean
from ..nn import Conv1d, Linear, Module

MIN_FRAMES = 8


@dataclass
class SpkEncConfig:
    d_spk: int = 32
    hidden: int = 32
    n_fft: int = 512
    hop: int = 128
    steps: int = 500
    speakers_per_batch: int = 8
    lr: float = 2e-3
    seed: int = 0
    holdout_per_speaker: int = 2


@dataclass
class SpeakerEmbedding:
    vector: np.ndarray
    source: str = "reference_audio"  # or "generated_audio"

    def __post_init__(self):
        self.vector = np.asarray(self.vector)
        if not np.all(np.isfinite(self.vector)):
            raise DataError("non-finite speaker embedding")


class SpeakerEncoder(Module):
    def __init__(self, rng: np.random.Generator, cfg: SpkEncConfig | None = None, dtype=np.float32):
        super().__init__()
        self.cfg = cfg if cfg is not None else SpkEncConfig()
        bins = self.cfg.n_fft // 2 + 1
        h = self.cfg.hidden
        self.inp = self.add_module("inp", Conv1d(rng, bins, h, 1, dtype=dtype))
        self.conv1 = self.add_module("conv1", Conv1d(rng, h, h, 3, dilation=1, dtype=dtype))
        self.conv2 = self.add_module("conv2", Conv1d(rng, h, h, 3, dilation=2, dtype=dtype))
        self.proj = self.add_module("proj", Linear(rng, h, self.cfg.d_spk, dtype=dtype))

    def embed_tensor(self, spec: Tensor) -> Tensor:
        """Differentiable path: spec (T, bins) magnitudes -> (d_spk,) embedding."""
        if spec.shape[0] < MIN_FRAMES:
            raise DataError(f"need at least {MIN_FRAMES} spectrogram frames, got {spec.shape[0]}")
        x = t_log(spec + 1.0)
        x = tanh(self.inp(x))
        x = x + tanh(self.conv1(x))
        x = x + tanh(self.conv2(x))
        pooled = tmean(x, axis=0)
        return self.proj(pooled.reshape((1, self.cfg.hidden))).reshape((self.cfg.d_spk,))

    def embed(self, spec: LinearSpectrogram, source: str = "reference_audio") -> SpeakerEmbedding:
        with no_grad():
            vec = self.embed_tensor(Tensor(spec.magnitudes.astype(np.float32))).data
        return SpeakerEmbedding(vec.copy(), source)

    def embed_waveform_tensor(self, wav: Tensor) -> Tensor:
        """Embed a waveform tensor via the differentiable STFT (used by the SCL)."""
        return self.embed_tensor(magnitude_stft_tensor(wav, self.cfg.n_fft, self.cfg.hop))
