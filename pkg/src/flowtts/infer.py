"""Inference paths: zero-shot synthesis and zero-shot voice conversion."""

from __future__ import annotations

import numpy as np

from .audio.dsp import LinearSpectrogram, Waveform, stft_linear
from .duration import expand_prior, sample_durations
from .ndgrad import Tensor, no_grad
from .train.model import TtsModel


def synthesize_waveform(
    model: TtsModel,
    token_ids: list[int],
    language_id: int,
    spk_embedding: np.ndarray,
    noise_scale: float = 0.667,
    duration_noise_scale: float = 0.8,
    prior_rng: np.random.Generator | None = None,
    duration_rng: np.random.Generator | None = None,
    durations: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Text -> waveform in the reference speaker's voice.

    Durations are sampled from noise through the inverted duration flow
    (unless given), the prior is expanded to frames and sampled at
    noise_scale, the flow decoder is inverted, and the vocoder renders
    exactly hop * sum(durations) samples. Returns (samples, durations).
    """
    spk = Tensor(np.asarray(spk_embedding, dtype=np.float32))
    with no_grad():
        hidden, prior = model.text_encoder.encode(token_ids, language_id)
        lang_row = model.lang_row(language_id)
        if durations is None:
            durations = sample_durations(
                hidden, spk, lang_row, model.duration_flow,
                noise_scale=duration_noise_scale,
                rng=duration_rng if duration_rng is not None else np.random.default_rng(),
            )
        durations = np.asarray(durations, dtype=np.int64)
        mu_f, ls_f = expand_prior(prior.mu, prior.log_sigma, durations)
        gen = prior_rng if prior_rng is not None else np.random.default_rng()
        eps = gen.standard_normal(mu_f.shape).astype(np.float32)
        z_p = Tensor(mu_f.data + np.exp(ls_f.data) * eps * noise_scale)
        z = model.flow.inverse(z_p, spk)
        wav = model.vocoder(z, spk)
    return wav.data.astype(np.float64), durations


def voice_convert_waveform(
    model: TtsModel,
    src_wav: Waveform,
    src_embedding: np.ndarray,
    tgt_embedding: np.ndarray,
) -> np.ndarray:
    """Re-render src_wav's content with the target speaker's identity.

    The posterior runs on its mean path (no sampling), the flow maps to
    the speaker-independent prior space with the source embedding and is
    inverted with the target embedding; durations are the source frames,
    so the output has exactly T * hop samples.
    """
    e_src = Tensor(np.asarray(src_embedding, dtype=np.float32))
    e_tgt = Tensor(np.asarray(tgt_embedding, dtype=np.float32))
    spec = stft_linear(src_wav, model.cfg.n_fft, model.cfg.hop)
    with no_grad():
        post = model.posterior.encode(spec, e_src, noise=np.zeros((spec.frames, model.cfg.d_z)))
        z_p, _ = model.flow.forward(post.z, e_src)
        z_tgt = model.flow.inverse(z_p, e_tgt)
        wav = model.vocoder(z_tgt, e_tgt)
    return wav.data.astype(np.float64)


def reconstruct_waveform(model: TtsModel, spec: LinearSpectrogram, spk_embedding: np.ndarray) -> np.ndarray:
    """Posterior mean -> vocoder; the plain reconstruction path."""
    spk = Tensor(np.asarray(spk_embedding, dtype=np.float32))
    with no_grad():
        post = model.posterior.encode(spec, spk, noise=np.zeros((spec.frames, model.cfg.d_z)))
        wav = model.vocoder(post.z, spk)
    return wav.data.astype(np.float64)
