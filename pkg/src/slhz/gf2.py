"""Small dense GF(2) linear algebra on uint8 arrays."""
from __future__ import annotations

import numpy as np


def rref(H: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    A = (np.asarray(H) & 1).astype(np.uint8, copy=True)
    m, n = A.shape
    pivots = []
    r = 0
    for c in range(n):
        if r >= m:
            break
        rows = np.flatnonzero(A[r:, c])
        if rows.size == 0:
            continue
        p = r + int(rows[0])
        if p != r:
            A[[r, p]] = A[[p, r]]
        ones = np.flatnonzero(A[:, c])
        ones = ones[ones != r]
        if ones.size:
            A[ones] ^= A[r]
        pivots.append(c)
        r += 1
    return A, pivots


def rank(H: np.ndarray) -> int:
    return len(rref(H)[1])


def in_rowspace(v: np.ndarray, H: np.ndarray) -> bool:
    """True if ``v`` is a GF(2) combination of the rows of ``H``."""
    v = (np.asarray(v).reshape(1, -1) & 1).astype(np.uint8)
    return rank(np.vstack([H, v])) == rank(H)


def all_in_rowspace(V: np.ndarray, H: np.ndarray) -> bool:
    """True if every row of ``V`` lies in the row space of ``H``."""
    return rank(np.vstack([H, V])) == rank(H)
