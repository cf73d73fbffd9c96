"""Deterministic RNG streams derived from a single root seed.

Every stochastic task owns a stream keyed by (root seed, task path); no
global RNG is ever touched.  Derivation goes through BLAKE2b so that the
mapping is stable across platforms and numpy versions, and so that nearby
task paths give statistically unrelated streams.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["child_seed", "rng_for"]


def child_seed(root: int, *path) -> int:
    """64-bit seed for the task identified by ``path`` under ``root``."""
    key = str(int(root)) + "\x1f" + "\x1f".join(str(p) for p in path)
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_for(root: int, *path) -> np.random.Generator:
    """Fresh PCG64 generator for (root, *path)."""
    return np.random.Generator(np.random.PCG64(child_seed(root, *path)))
