"""Speaker-verification metrics: embedding cosine similarity and EER."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .model import SpeakerEmbedding


def _vec(x) -> np.ndarray:
    if isinstance(x, SpeakerEmbedding):
        return np.asarray(x.vector, dtype=np.float64)
    return np.asarray(x, dtype=np.float64)


def secs(a, b) -> float:
    """Cosine similarity between speaker embeddings, in [-1, 1]."""
    va, vb = _vec(a), _vec(b)
    if va.shape != vb.shape:
        raise ValueError(f"embedding dimensions differ: {va.shape} vs {vb.shape}")
    pa = float(va @ va)
    pb = float(vb @ vb)
    if pa == 0.0 or pb == 0.0:
        raise ValueError("secs of a zero embedding")
    return float(va @ vb / np.sqrt(pa * pb))


def eer(genuine_scores, impostor_scores) -> float:
    """Equal error rate via a threshold sweep over the observed scores.

    Accept when score >= threshold; candidates are the pooled score values
    plus one above the maximum (rank-based, so the result is invariant
    under any strictly increasing transform of all scores). Returns the
    average of FAR and FRR at the |FAR - FRR| minimizer.
    """
    g = np.asarray(list(genuine_scores), dtype=np.float64)
    i = np.asarray(list(impostor_scores), dtype=np.float64)
    if g.size == 0 or i.size == 0:
        raise DataError("eer needs non-empty genuine and impostor score lists")
    candidates = np.unique(np.concatenate([g, i]))
    candidates = np.append(candidates, candidates[-1] + 1.0)
    best_gap, best_rate = np.inf, 0.5
    for t in candidates:
        far = float(np.mean(i >= t))
        frr = float(np.mean(g < t))
        gap = abs(far - frr)
        if gap < best_gap - 1e-12:
            best_gap, best_rate = gap, 0.5 * (far + frr)
    return best_rate
