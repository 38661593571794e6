"""Deterministic fan-out of one user seed into named substreams.

Every stochastic step in the toolkit draws from a generator obtained here, so
a single integer seed reproduces a whole run.  Substreams are addressed by a
path of tokens, e.g. ``rng_for(seed, "fold", 12)``; string tokens are hashed
with CRC-32 so the derivation is stable across processes and platforms.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def _token_to_int(token) -> int:
    if isinstance(token, (int, np.integer)):
        return int(token) & _MASK64
    return zlib.crc32(str(token).encode("utf-8"))


def seed_sequence(seed: int, *path) -> np.random.SeedSequence:
    """SeedSequence for the substream addressed by ``path``."""
    entropy = [int(seed) & _MASK64] + [_token_to_int(t) for t in path]
    return np.random.SeedSequence(entropy)


def rng_for(seed: int, *path) -> np.random.Generator:
    """Generator for the substream addressed by ``path``."""
    return np.random.default_rng(seed_sequence(seed, *path))


def subseed(seed: int, *path) -> int:
    """64-bit integer seed for the substream addressed by ``path``."""
    return int(seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0])
