"""Named deterministic RNG streams.

Every stochastic site (parameter init, posterior noise, segment slicing,
duration noise, batch sampling) pulls from its own named stream so that
toggling one feature never shifts another's draws. Streams are derived
from (seed, name) via SHA-256, so they are stable across processes and
independent of PYTHONHASHSEED.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _child_seed(seed: int, name: str) -> np.random.SeedSequence:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *words])


class RngStreams:
    """Factory of named np.random.Generator streams for one base seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def get(self, name: str) -> np.random.Generator:
        """Return the persistent generator for `name`, creating it on first use."""
        gen = self._streams.get(name)
        if gen is None:
            gen = np.random.Generator(np.random.PCG64(_child_seed(self.seed, name)))
            self._streams[name] = gen
        return gen

    def fresh(self, name: str) -> np.random.Generator:
        """Return a new generator at the start of the named stream."""
        return np.random.Generator(np.random.PCG64(_child_seed(self.seed, name)))
