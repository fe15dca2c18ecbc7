"""Named, reproducible random sub-streams derived from a single integer seed."""
from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, name: str, index: int = 0) -> np.random.Generator:
    """Return an independent Philox generator keyed by (seed, name, index).

    Two calls with the same triple give identical streams; changing any part
    gives a statistically independent stream.
    """
    if seed < 0:
        raise ValueError("seed must be non-negative")
    key = (zlib.crc32(name.encode("utf-8")), int(index))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))
