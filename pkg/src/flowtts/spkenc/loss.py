"""Speaker-level losses: speaker consistency and the episodic training loss."""

from __future__ import annotations

import numpy as np

from ..ndgrad import Tensor, concat, cosine_similarity, exp as t_exp, log as t_log, no_grad, tsum
from .model import SpeakerEncoder


def scl_loss(gt_wavs: list[Tensor], gen_wavs: list[Tensor], alpha: float, encoder: SpeakerEncoder) -> Tensor:
    """Speaker consistency loss (-alpha / n) * sum_i cos(phi(gt_i), phi(gen_i)).

    The ground-truth branch runs off-tape, so gradient reaches only the
    generated waveforms (and would reach encoder weights only if they are
    left trainable; during TTS training the encoder is frozen).
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    n = len(gen_wavs)
    if n == 0 or len(gt_wavs) != n:
        raise ValueError("scl_loss needs equal, non-empty batches")
    total = None
    for gt, gen in zip(gt_wavs, gen_wavs):
        with no_grad():
            e_gt = encoder.embed_waveform_tensor(gt if isinstance(gt, Tensor) else Tensor(np.asarray(gt)))
        e_gen = encoder.embed_waveform_tensor(gen)
        c = cosine_similarity(Tensor(e_gt.data), e_gen)
        total = c if total is None else total + c
    return total * (-alpha / n)


def _logsumexp_row(row: Tensor) -> Tensor:
    # subtracting the max as a constant keeps exp well-scaled and the identity exact
    c = float(np.max(row.data))
    return t_log(tsum(t_exp(row - c))) + c


def angular_proto_loss(queries: list[Tensor], prototypes: list[Tensor], w: Tensor, b: Tensor) -> Tensor:
    """Episodic angular-prototypical loss with learnable scale and offset.

    queries[i] should match prototypes[i]; all off-diagonal pairs act as
    negatives. Cross-entropy over scaled cosine logits, averaged over rows.
    """
    n = len(queries)
    if n < 2 or len(prototypes) != n:
        raise ValueError("need >= 2 matched query/prototype pairs")
    loss = None
    for i in range(n):
        cells = []
        for j in range(n):
            c = cosine_similarity(queries[i], prototypes[j])
            cells.append((c * w + b).reshape((1,)))
        row = concat(cells)
        ce = _logsumexp_row(row) - row[i]
        loss = ce if loss is None else loss + ce
    return loss * (1.0 / n)
