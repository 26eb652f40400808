"""Deterministic splittable random streams.

Every stochastic routine in this package draws from a generator obtained
here.  Streams are keyed by (seed, *path): the same key always yields the
same stream, distinct keys yield statistically independent streams.  Work
split over blocks or replicas therefore produces identical results for any
execution order or parallelism degree.
"""

from __future__ import annotations

import numpy as np

_U64 = (1 << 64) - 1


def stream(seed: int, *path: int) -> np.random.Generator:
    """Counter-based generator for the substream identified by ``path``."""
    key = tuple(int(p) & _U64 for p in path)
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """64-bit seed for the substream, usable as another stream's root."""
    key = tuple(int(p) & _U64 for p in path)
    ss = np.random.SeedSequence(entropy=int(seed) & _U64, spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])
