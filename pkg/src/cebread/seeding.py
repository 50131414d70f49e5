"""Deterministic seed derivation.

All randomness in the toolkit flows from one user-supplied integer seed.
Components never share a generator: each derives its own sub-seed by
hashing (seed, component name, indices...), so adding a consumer in one
place cannot shift the random stream of another.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *parts: object) -> int:
    """Return a stable non-negative 64-bit sub-seed for (seed, *parts).

    Uses SHA-256 rather than hash() so the value is identical across
    processes and platforms regardless of PYTHONHASHSEED.
    """
    key = "|".join([str(int(seed)), *[str(p) for p in parts]])
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def rng_for(seed: int, *parts: object) -> np.random.Generator:
    """A fresh PCG64 generator seeded from derive_seed(seed, *parts)."""
    return np.random.default_rng(derive_seed(seed, *parts))
