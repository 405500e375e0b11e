"""Posterior encoder: linear spectrogram + speaker embedding -> diagonal
Gaussian over the latent z, plus the KL terms used in training.

Training objective decomposition (declared here, validated by the MC
oracle in the tests): we maximize

    E_q[log N(f(z); prior)] + log |det J_f| - E_q[log q(z | spec)]

with a single z sample for the two cross terms and the exact Gaussian
entropy for the last, which yields the per-element term

    logs_p - logs_q - 1/2 + (z_p - mu_p)^2 / (2 sigma_p^2)

minus log_det spread over the elements (kl_sample_term). The closed-form
diagonal-Gaussian KL (kl_aligned) is the same quantity in expectation
when f is the identity; it is kept as the reference operation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio.dsp import LinearSpectrogram
from ..ndgrad import Tensor, clip, exp as t_exp, log as t_log, tmean
from ..nn import Conv1d, GatedResidualStack, Module

LOG_SIGMA_MIN, LOG_SIGMA_MAX = -9.0, 2.0


@dataclass
class PosteriorEncoderConfig:
    n_bins: int = 257
    d_z: int = 16
    hidden: int = 32
    d_spk: int = 32
    n_blocks: int = 4
    kernel: int = 3

    @classmethod
    def paper_scale(cls, d_spk: int = 32) -> "PosteriorEncoderConfig":
        return cls(d_z=192, hidden=192, d_spk=d_spk, n_blocks=16)


@dataclass
class PosteriorSample:
    z: Tensor  # (T, d_z)
    mu: Tensor
    log_sigma: Tensor
    epsilon: np.ndarray  # the noise actually used; z = mu + exp(log_sigma) * epsilon


class PosteriorEncoder(Module):
    def __init__(self, rng, cfg: PosteriorEncoderConfig | None = None, dtype=np.float32):
        super().__init__()
        self.cfg = cfg if cfg is not None else PosteriorEncoderConfig()
        c = self.cfg
        self.pre = self.add_module("pre", Conv1d(rng, c.n_bins, c.hidden, 1, dtype=dtype))
        self.wn = self.add_module(
            "wn", GatedResidualStack(rng, c.hidden, c.d_spk, n_blocks=c.n_blocks, kernel=c.kernel, dtype=dtype)
        )
        self.head = self.add_module("head", Conv1d(rng, c.hidden, 2 * c.d_z, 1, zero_init=True, dtype=dtype))
        self.dtype = dtype

    def encode(self, spec, spk: Tensor, noise: np.ndarray | None = None, rng=None) -> PosteriorSample:
        """spec: LinearSpectrogram or (T, bins) array; noise defaults to rng draws."""
        mags = spec.magnitudes if isinstance(spec, LinearSpectrogram) else np.asarray(spec)
        if mags.ndim != 2 or mags.shape[1] != self.cfg.n_bins:
            raise ValueError(f"expected (T, {self.cfg.n_bins}) magnitudes, got {mags.shape}")
        if mags.shape[0] < 1:
            raise ValueError("need at least one spectrogram frame")
        if spk.shape != (self.cfg.d_spk,):
            raise ValueError(f"speaker embedding must be ({self.cfg.d_spk},), got {spk.shape}")
        x = t_log(Tensor(mags.astype(self.dtype)) + 1.0)
        h = self.wn(self.pre(x), spk)
        stats = self.head(h)
        mu = stats[:, : self.cfg.d_z]
        log_sigma = clip(stats[:, self.cfg.d_z :], LOG_SIGMA_MIN, LOG_SIGMA_MAX)
        t_frames = mags.shape[0]
        if noise is None:
            gen = rng if rng is not None else np.random.default_rng()
            noise = gen.standard_normal((t_frames, self.cfg.d_z))
        noise = np.asarray(noise, dtype=self.dtype)
        if noise.shape != (t_frames, self.cfg.d_z):
            raise ValueError(f"noise must be ({t_frames}, {self.cfg.d_z}), got {noise.shape}")
        z = mu + t_exp(log_sigma) * Tensor(noise)
        return PosteriorSample(z=z, mu=mu, log_sigma=log_sigma, epsilon=noise)


def kl_aligned(mu_q: Tensor, log_sigma_q: Tensor, mu_p: Tensor, log_sigma_p: Tensor) -> Tensor:
    """Closed-form KL(N(mu_q, sigma_q) || N(mu_p, sigma_p)), mean per element.

    log(sigma_p / sigma_q) + (sigma_q^2 + (mu_q - mu_p)^2) / (2 sigma_p^2) - 1/2
    """
    for t in (log_sigma_q, mu_p, log_sigma_p):
        if t.shape != mu_q.shape:
            raise ValueError(f"KL shape mismatch: {t.shape} vs {mu_q.shape}")
    var_ratio = t_exp(2.0 * (log_sigma_q - log_sigma_p))
    delta = (mu_q - mu_p) * t_exp(-log_sigma_p)
    per_elem = (log_sigma_p - log_sigma_q) + 0.5 * (var_ratio + delta * delta) - 0.5
    return tmean(per_elem)


def kl_sample_term(z_p: Tensor, log_sigma_q: Tensor, mu_p: Tensor, log_sigma_p: Tensor, log_det: Tensor) -> Tensor:
    """Single-sample KL estimate on the flow-transformed posterior.

    Exact entropy term, one-sample cross-entropy at z_p = f(z), and the
    flow's log-det spread uniformly over the (T, d_z) elements so the
    result stays per-element comparable with kl_aligned.
    """
    for t in (log_sigma_q, mu_p, log_sigma_p):
        if t.shape != z_p.shape:
            raise ValueError(f"KL shape mismatch: {t.shape} vs {z_p.shape}")
    delta = (z_p - mu_p) * t_exp(-log_sigma_p)
    per_elem = (log_sigma_p - log_sigma_q) - 0.5 + 0.5 * delta * delta
    n = float(z_p.data.size)
    return tmean(per_elem) - log_det * (1.0 / n)
