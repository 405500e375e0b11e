"""Signal processing: magnitude STFT, loudness normalization, silence trimming.

STFT convention (recorded on every LinearSpectrogram): periodic Hann
window, frame_length = n_fft, no padding, so T = 1 + (n - n_fft) // hop.
The tape-differentiable STFT below uses the same framing and window so
losses computed on it line up exactly with the numpy fast path.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import AllSilentError, DataError
from ..ndgrad import Tensor, frame, sqrt as t_sqrt

log = logging.getLogger(__name__)

DEFAULT_SAMPLE_RATE = 16000
DEFAULT_N_FFT = 512
DEFAULT_HOP = 128


@dataclass
class Waveform:
    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    def __len__(self) -> int:
        return len(self.samples)


@dataclass
class LinearSpectrogram:
    magnitudes: np.ndarray  # (T, n_fft // 2 + 1), non-negative
    n_fft: int
    hop_length: int
    sample_rate: int = DEFAULT_SAMPLE_RATE
    window: str = "hann_periodic"
    padding: str = "none"

    @property
    def frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def bins(self) -> int:
        return self.magnitudes.shape[1]


def hann_periodic(n_fft: int, dtype=np.float64) -> np.ndarray:
    n = np.arange(n_fft, dtype=dtype)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * n / n_fft)


def stft_linear(wav: Waveform, n_fft: int = DEFAULT_N_FFT, hop: int = DEFAULT_HOP) -> LinearSpectrogram:
    """Magnitude STFT with a periodic Hann window and no padding."""
    x = wav.samples
    if len(x) < n_fft:
        raise DataError(f"waveform of {len(x)} samples is shorter than one frame ({n_fft})")
    t_frames = 1 + (len(x) - n_fft) // hop
    s = x.strides[0]
    frames = np.lib.stride_tricks.as_strided(x, shape=(t_frames, n_fft), strides=(hop * s, s))
    windowed = frames * hann_periodic(n_fft, x.dtype)
    mags = np.abs(np.fft.rfft(windowed, axis=1))
    return LinearSpectrogram(mags, n_fft=n_fft, hop_length=hop, sample_rate=wav.sample_rate)


_DFT_CACHE: dict = {}


def _dft_matrices(n_fft: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    key = (n_fft, np.dtype(dtype).name)
    mats = _DFT_CACHE.get(key)
    if mats is None:
        bins = n_fft // 2 + 1
        n = np.arange(n_fft, dtype=np.float64)[:, None]
        k = np.arange(bins, dtype=np.float64)[None, :]
        ang = 2.0 * np.pi * n * k / n_fft
        mats = (np.cos(ang).astype(dtype), (-np.sin(ang)).astype(dtype))
        _DFT_CACHE[key] = mats
    return mats


def magnitude_stft_tensor(x: Tensor, n_fft: int = DEFAULT_N_FFT, hop: int = DEFAULT_HOP, eps: float = 1e-9) -> Tensor:
    """Differentiable magnitude STFT of a 1-D signal tensor -> (T, bins).

    Same framing/window as stft_linear; magnitudes are sqrt(re^2 + im^2 + eps^2)
    so the gradient stays finite at silent bins.
    """
    cos_m, sin_m = _dft_matrices(n_fft, x.dtype)
    win = hann_periodic(n_fft, x.dtype)
    frames = frame(x, n_fft, hop)
    windowed = frames * Tensor(win)
    re = windowed @ Tensor(cos_m)
    im = windowed @ Tensor(sin_m)
    return t_sqrt(re * re + im * im + eps * eps)


def rms_dbfs(samples: np.ndarray) -> float:
    rms = float(np.sqrt(np.mean(np.square(np.asarray(samples, dtype=np.float64)))))
    if rms == 0.0:
        return float("-inf")
    return 20.0 * np.log10(rms)


def rms_normalize(wav: Waveform, target_db: float = -27.0) -> Waveform:
    """Scale so the RMS level hits target_db dBFS; clipped samples are logged."""
    x = wav.samples
    rms = np.sqrt(np.mean(np.square(x)))
    if rms == 0.0:
        raise DataError("cannot normalize a silent (zero RMS) signal")
    gain = 10.0 ** (target_db / 20.0) / rms
    y = x * gain
    n_clipped = int(np.count_nonzero(np.abs(y) > 1.0))
    if n_clipped:
        log.warning("rms_normalize clipped %d samples (gain %.3f)", n_clipped, gain)
        y = np.clip(y, -1.0, 1.0)
    return Waveform(y, wav.sample_rate)


def trim_silence(wav: Waveform, frame_ms: float = 30.0, threshold_db: float = -45.0) -> Waveform:
    """Drop leading/trailing frames whose RMS falls below threshold_db.

    Frames are non-overlapping windows anchored at sample 0 (a trailing
    partial frame counts), and cuts land on frame boundaries, which makes
    the operation exactly idempotent.
    """
    x = wav.samples
    flen = max(1, int(round(wav.sample_rate * frame_ms / 1000.0)))
    n_frames = (len(x) + flen - 1) // flen
    loud = []
    for i in range(n_frames):
        seg = x[i * flen : (i + 1) * flen]
        loud.append(rms_dbfs(seg) >= threshold_db)
    if not any(loud):
        raise AllSilentError("all-silent: every frame is below the trim threshold")
    first = loud.index(True)
    last = len(loud) - 1 - loud[::-1].index(True)
    return Waveform(x[first * flen : min(len(x), (last + 1) * flen)], wav.sample_rate)


def preprocess(wav: Waveform, target_db: float = -27.0, frame_ms: float = 30.0, threshold_db: float = -45.0) -> Waveform:
    """Trim silence, then normalize loudness (the standard ingest path)."""
    return rms_normalize(trim_silence(wav, frame_ms, threshold_db), target_db)
