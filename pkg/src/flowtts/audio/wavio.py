"""WAV I/O: 16-bit PCM, mono, little-endian RIFF."""

from __future__ import annotations

import os
import wave

import numpy as np

from ..errors import DataError


def read_wav(path: str) -> tuple[np.ndarray, int]:
    """Read a mono 16-bit PCM WAV; returns (float32 samples in [-1, 1], sample_rate)."""
    try:
        with wave.open(path, "rb") as wf:
            if wf.getsampwidth() != 2:
                raise DataError(f"{path}: expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
            if wf.getnchannels() != 1:
                raise DataError(f"{path}: expected mono, got {wf.getnchannels()} channels")
            sr = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as e:
        raise DataError(f"{path}: not a valid WAV file ({e})") from e
    except FileNotFoundError as e:
        raise DataError(f"{path}: file not found") from e
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32767.0
    return samples, sr


def write_wav(path: str, samples: np.ndarray, sample_rate: int) -> None:
    """Write float samples in [-1, 1] as 16-bit PCM mono, atomically.

    The file is written to a temporary sibling and renamed into place, so a
    failure mid-write never leaves a partial WAV at `path`.
    """
    pcm = np.round(np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0) * 32767.0).astype("<i2")
    tmp = path + ".tmp"
    try:
        with wave.open(tmp, "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(int(sample_rate))
            wf.writeframes(pcm.tobytes())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)
