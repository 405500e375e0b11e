"""Batch sampling policies: language-balanced and adaptation quarter-batch."""

from __future__ import annotations

from collections import Counter
from typing import Iterator, Sequence

import numpy as np

from ..errors import DataError


def language_weights(language_ids: Sequence[int]) -> np.ndarray:
    """Per-item weights inversely proportional to language frequency."""
    if len(language_ids) == 0:
        raise DataError("empty manifest")
    counts = Counter(language_ids)
    w = np.array([1.0 / counts[lid] for lid in language_ids], dtype=np.float64)
    return w / w.sum()


def language_balanced_batches(
    language_ids: Sequence[int],
    batch_size: int,
    rng: np.random.Generator,
) -> Iterator[list[int]]:
    """Endless stream of index batches; each language's expected share is equal."""
    weights = language_weights(language_ids)
    n = len(language_ids)
    while True:
        yield [int(i) for i in rng.choice(n, size=batch_size, p=weights, replace=True)]


def adaptation_batches(
    language_ids: Sequence[int],
    adapted_indices: Sequence[int],
    batch_size: int,
    rng: np.random.Generator,
    fraction: float = 0.25,
) -> Iterator[list[int]]:
    """Exactly ceil(batch_size * fraction) adapted slots per batch, every batch;
    the remainder is language-balanced over the full manifest."""
    if len(adapted_indices) == 0:
        raise DataError("adapted speaker has no samples")
    n_adapted = int(np.ceil(batch_size * fraction))
    if n_adapted >= batch_size:
        n_adapted = batch_size
    weights = language_weights(language_ids)
    n = len(language_ids)
    adapted = np.asarray(list(adapted_indices), dtype=np.int64)
    while True:
        batch = [int(i) for i in rng.choice(adapted, size=n_adapted, replace=True)]
        rest = batch_size - n_adapted
        if rest:
            batch += [int(i) for i in rng.choice(n, size=rest, p=weights, replace=True)]
        yield batch
