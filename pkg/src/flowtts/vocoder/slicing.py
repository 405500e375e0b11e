"""Random constant-length latent/waveform segment pairs for vocoder training."""

from __future__ import annotations

import numpy as np

from ..ndgrad import Tensor


def slice_segments(
    z: Tensor,
    wav: np.ndarray,
    seg_frames: int,
    hop: int,
    rng: np.random.Generator,
) -> tuple[Tensor, np.ndarray, int]:
    """Pick a uniform start in [0, T - seg_frames]; returns (z_seg, wav_seg, start).

    The waveform slice covers exactly the samples the latent frames were
    computed from: wav[start * hop : (start + seg_frames) * hop].
    """
    t_frames = z.shape[0]
    if t_frames < seg_frames:
        raise ValueError(f"utterance of {t_frames} frames shorter than segment {seg_frames}")
    if len(wav) < t_frames * hop:
        raise ValueError(f"waveform of {len(wav)} samples cannot cover {t_frames} frames at hop {hop}")
    start = int(rng.integers(0, t_frames - seg_frames + 1))
    z_seg = z[start : start + seg_frames]
    wav_seg = np.asarray(wav)[start * hop : (start + seg_frames) * hop]
    return z_seg, wav_seg, start
