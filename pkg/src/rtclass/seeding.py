"""Named child seeds derived from one master seed."""
from __future__ import annotations

import zlib

import numpy as np


def child_seed(seed: int, *names: str | int) -> int:
    """Deterministic 63-bit seed for the stream identified by ``names``."""
    key = tuple(n if isinstance(n, int) else zlib.crc32(str(n).encode()) for n in names)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def rng_for(seed: int, *names: str | int) -> np.random.Generator:
    return np.random.default_rng(child_seed(seed, *names))
