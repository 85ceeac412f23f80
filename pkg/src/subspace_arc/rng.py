"""Deterministic random-number plumbing.

Every random object in this package (sketch matrices, rotated low-rank
embeddings, benchmark run streams) is a pure function of a 64-bit seed.  Bit
generation uses numpy's Philox engine, a counter-based generator with a fixed,
published algorithm, so equal seeds reproduce equal streams across platforms.
Child seeds are derived through ``SeedSequence`` spawn keys rather than seed
arithmetic, which keeps derived streams statistically independent.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def generator(seed: int) -> np.random.Generator:
    """Philox generator for the given 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed & _MASK64)))


def derive_seed(seed: int, *key: int) -> int:
    """Derive an independent child seed from ``seed`` and an index path.

    ``derive_seed(s, a, b)`` and ``derive_seed(s, a, c)`` give unrelated
    streams for ``b != c``; the map is deterministic and collision-resistant.
    """
    ss = np.random.SeedSequence(seed & _MASK64, spawn_key=tuple(k & _MASK64 for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
