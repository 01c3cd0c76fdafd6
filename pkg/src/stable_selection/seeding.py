"""Deterministic derivation of independent random streams from one master seed.

Every stochastic step in this package (bag sampling, per-bag learner seeds,
synthetic data, leave-one-out index sampling, fuzz suites) draws from a stream
derived here, so a run is a pure function of its master seed regardless of
execution order or parallelism.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_int(part: int | str) -> int:
    """Map a stream label to a stable integer (CRC32 for strings)."""
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def seed_sequence(seed: int, *key: int | str) -> np.random.SeedSequence:
    """SeedSequence for the stream named by ``key`` under master ``seed``."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(_key_int(k) for k in key))


def spawn_rng(seed: int, *key: int | str) -> np.random.Generator:
    """Fresh Generator for the named stream; same (seed, key) -> same stream."""
    return np.random.default_rng(seed_sequence(seed, *key))


def spawn_seed(seed: int, *key: int | str) -> int:
    """Derived integer seed for code that takes a plain seed argument."""
    return int(seed_sequence(seed, *key).generate_state(1, dtype=np.uint64)[0])
