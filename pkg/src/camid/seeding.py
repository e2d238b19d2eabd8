"""Deterministic seed splitting.

Child seeds are derived from a parent seed and a key path with
:class:`numpy.random.SeedSequence`: the parent is the entropy and the key
path (strings hashed with CRC32, integers as-is) is the spawn key.  The
first two 32-bit words of the generated state form the 64-bit child seed.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def derive_seed(parent: int, *path) -> int:
    ss = np.random.SeedSequence(entropy=int(parent), spawn_key=tuple(_key(p) for p in path))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)
