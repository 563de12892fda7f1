"""Deterministic seed fan-out.

Child seeds are a hash of (master seed, experiment name, index path) so any
subset of an experiment can be re-run on its own and still draw the same
numbers.
"""
from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def child_seed(master: int, name: str, *index: int) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master) & MASK64).encode())
    h.update(b"\x00" + name.encode())
    for i in index:
        h.update(b"\x00" + str(int(i)).encode())
    return int.from_bytes(h.digest(), "little")


def rng_for(master: int, name: str, *index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(child_seed(master, name, *index)))
