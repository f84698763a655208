"""Counter-based random sub-streams.

Every random draw in the simulator comes from a generator keyed by a tuple of
integers (master seed, drop, purpose, ids...).  Philox is counter-based, so a
stream depends only on its key and never on how many other streams were
consumed first; this is what makes results independent of worker count and
iteration order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _as_word(key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    key = int(key)
    if key < 0:
        raise ValueError(f"stream keys must be non-negative, got {key}")
    return key


def substream(seed: int, *keys) -> np.random.Generator:
    """Generator for the sub-stream identified by ``(seed, *keys)``."""
    words = [_as_word(seed)] + [_as_word(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(words)))


def derive_seed(seed: int, *keys) -> int:
    """A 63-bit integer seed derived from ``(seed, *keys)``."""
    words = [_as_word(seed)] + [_as_word(k) for k in keys]
    return int(np.random.SeedSequence(words).generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))
