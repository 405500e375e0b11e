"""Multi-resolution spectral reconstruction loss.

Sum over STFT resolutions of the L1 distance between log magnitudes,
plus an L1 waveform term (the magnitude terms are blind to a sign flip;
the waveform term is not). Stands in for the adversarial + feature
matching objectives at desk scale.
"""

from __future__ import annotations

import numpy as np

from ..audio.dsp import magnitude_stft_tensor
from ..ndgrad import Tensor, absolute, log as t_log, no_grad, tmean

DEFAULT_RESOLUTIONS = ((512, 128), (256, 64), (1024, 256))
LOG_FLOOR = 1e-5


def spectral_loss(
    wav_hat: Tensor,
    wav,
    resolutions=DEFAULT_RESOLUTIONS,
    wave_weight: float = 1.0,
) -> Tensor:
    """wav_hat on the tape, wav the reference (array or tensor)."""
    ref = wav.data if isinstance(wav, Tensor) else np.asarray(wav)
    if wav_hat.data.ndim != 1 or ref.ndim != 1:
        raise ValueError("spectral_loss expects 1-D waveforms")
    if wav_hat.shape[0] != ref.shape[0]:
        raise ValueError(f"length mismatch: {wav_hat.shape[0]} vs {ref.shape[0]}")
    ref_t = Tensor(ref.astype(wav_hat.data.dtype))
    total = tmean(absolute(wav_hat - ref_t)) * wave_weight
    for n_fft, hop in resolutions:
        if ref.shape[0] < n_fft:
            raise ValueError(f"waveform of {ref.shape[0]} samples too short for n_fft {n_fft}")
        mag_hat = magnitude_stft_tensor(wav_hat, n_fft, hop)
        with no_grad():
            mag_ref = magnitude_stft_tensor(ref_t, n_fft, hop)
        log_hat = t_log(mag_hat + LOG_FLOOR)
        log_ref = np.log(mag_ref.data + LOG_FLOOR)
        total = total + tmean(absolute(log_hat - Tensor(log_ref)))
    return total
