"""Parity-encoded (SLHZ) spin system viewed as a classical code.

N logical spins ``Z_i`` are encoded into the ``N(N-1)/2`` physical spins
``z_ij = Z_i Z_j`` which are stored as an ``N x N`` symmetric bipolar matrix
with unit diagonal (the diagonal holds the ancilla spins fixed at +1).

Indices in this module are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class NotACodeStateError(ValueError):
    """Raised when an operation needs a valid code state and got something else."""


class SpinMatrix:
    """Immutable symmetric bipolar matrix with unit diagonal.

    Holds readouts ``r``, code states ``z`` and error patterns ``e`` alike.
    ``np.asarray(spin_matrix)`` gives a read-only ``int8`` view.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries, *, validate: bool = True):
        arr = np.array(entries, dtype=np.int8, copy=True)
        if validate:
            _check_spin_array(arr)
        arr.setflags(write=False)
        self._entries = arr

    @property
    def n(self) -> int:
        return self._entries.shape[0]

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    def upper(self) -> np.ndarray:
        """Physical spins in row-major upper-triangle order."""
        iu = upper_indices(self.n)
        return self._entries[iu]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._entries
        return self._entries.astype(dtype)

    def __getitem__(self, idx):
        return self._entries[idx]

    def __eq__(self, other):
        if not isinstance(other, SpinMatrix):
            return NotImplemented
        return self._entries.shape == other._entries.shape and bool(
            np.array_equal(self._entries, other._entries)
        )

    def __hash__(self):
        return hash((self.n, self._entries.tobytes()))

    def __repr__(self):
        return f"SpinMatrix(n={self.n}, {to_sign_string(self.upper())!r})"


@dataclass(frozen=True, order=True)
class Plaquette:
    """One weight-4 check over spins (i,k), (j,k), (j,l), (i,l).

    With ``j == k`` the spin (j,k) is the ancilla and the check has weight 3.
    """

    i: int
    j: int
    k: int
    l: int

    def spins(self) -> tuple[tuple[int, int], ...]:
        return ((self.i, self.k), (self.j, self.k), (self.j, self.l), (self.i, self.l))

    def physical_spins(self) -> tuple[tuple[int, int], ...]:
        """The spins of the check excluding the ancilla, each as (a, b) with a < b."""
        return tuple((min(a, b), max(a, b)) for a, b in self.spins() if a != b)


@dataclass(frozen=True)
class Classification:
    """Outcome class of a decoded matrix.

    ``kind`` is ``"error_free"``, ``"code"`` or ``"non_code"``. For ``"code"``
    the number of logical errors (modulo global flip) is in ``logical_errors``;
    it is ``None`` when no target was available.
    """

    kind: str
    logical_errors: int | None = None

    @property
    def is_code_state(self) -> bool:
        return self.kind in ("error_free", "code")

    def label(self) -> str:
        if self.kind == "code" and self.logical_errors is not None:
            return f"code({self.logical_errors})"
        return self.kind


def _check_spin_array(arr: np.ndarray) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"spin matrix must be square, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError("spin matrix needs n >= 2")
    if not np.all(np.abs(arr) == 1):
        raise ValueError("spin matrix entries must be +1 or -1")
    if not np.all(np.diagonal(arr) == 1):
        raise ValueError("spin matrix diagonal must be +1")
    if not np.array_equal(arr, arr.T):
        raise ValueError("spin matrix must be symmetric")


@lru_cache(maxsize=None)
def upper_indices(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-major upper-triangle index arrays (i < j) for an ``n x n`` matrix."""
    iu = np.triu_indices(n, 1)
    for a in iu:
        a.setflags(write=False)
    return iu


def num_physical(n: int) -> int:
    return n * (n - 1) // 2


def num_plaquettes(n: int) -> int:
    return (n - 1) * (n - 2) // 2


def to_sign_string(values: Iterable[int]) -> str:
    return "".join("+" if v > 0 else "-" for v in values)


def from_sign_string(text: str) -> list[int]:
    out = []
    for ch in text:
        if ch == "+":
            out.append(1)
        elif ch == "-":
            out.append(-1)
        else:
            raise ValueError(f"invalid spin character {ch!r}")
    return out


def fill_symmetric(n: int, upper_values, dtype=np.int8, diagonal=1) -> np.ndarray:
    """Build a symmetric ``n x n`` array from upper-triangle values."""
    out = np.full((n, n), diagonal, dtype=dtype)
    iu = upper_indices(n)
    vals = np.asarray(upper_values, dtype=dtype)
    out[iu] = vals
    out[iu[1], iu[0]] = vals
    return out


def make_spin_matrix(n: int, offdiag: Sequence[int]) -> SpinMatrix:
    """Spin matrix from its ``n(n-1)/2`` physical spins in upper-triangle order."""
    if n < 2:
        raise ValueError("n must be >= 2")
    vals = list(offdiag)
    if len(vals) != num_physical(n):
        raise ValueError(f"expected {num_physical(n)} values for n={n}, got {len(vals)}")
    if any(v not in (1, -1) for v in vals):
        raise ValueError("values must be +1 or -1")
    return SpinMatrix(fill_symmetric(n, vals), validate=False)


def ones(n: int) -> SpinMatrix:
    """The ferromagnetic code state (all +1)."""
    return SpinMatrix(np.ones((n, n), dtype=np.int8), validate=False)


def _as_logical(Z) -> np.ndarray:
    Z = np.asarray(Z)
    if Z.ndim != 1 or Z.size < 2:
        raise ValueError("logical state must be a vector of length >= 2")
    if not np.all(np.abs(Z) == 1):
        raise ValueError("logical state values must be +1 or -1")
    return Z.astype(np.int8)


def encode(Z) -> SpinMatrix:
    """Code state ``Z (x) Z``."""
    Z = _as_logical(Z)
    return SpinMatrix(np.outer(Z, Z), validate=False)


def _check_indices(n: int, *idx: int) -> None:
    for a in idx:
        if not 0 <= a < n:
            raise IndexError(f"index {a} out of range for n={n}")
    if len(set(idx)) != len(idx):
        raise ValueError(f"indices must be distinct, got {idx}")


def syndrome3(r, i: int, j: int, k: int) -> int:
    """Weight-3 syndrome ``r_ij r_jk r_ik``."""
    r = np.asarray(r)
    _check_indices(r.shape[0], i, j, k)
    return int(r[i, j]) * int(r[j, k]) * int(r[i, k])


def _check_plaquette(n: int, p: Plaquette) -> None:
    if not (0 <= p.i < p.j <= p.k < p.l < n):
        raise ValueError(f"invalid plaquette {p} for n={n}")


def syndrome4(r, p: Plaquette) -> int:
    """Weight-4 syndrome ``r_ik r_jk r_jl r_il`` (diagonal ancilla used when j == k)."""
    r = np.asarray(r)
    _check_plaquette(r.shape[0], p)
    out = 1
    for a, b in p.spins():
        out *= int(r[a, b])
    return out


def enumerate_plaquettes(n: int) -> list[Plaquette]:
    """The ``(n-1)(n-2)/2`` plaquettes ``{i, i+1, k, k+1}`` with ``i < k <= n-2``."""
    if n < 3:
        raise ValueError("plaquettes need n >= 3")
    return [Plaquette(i, i + 1, k, k + 1) for i in range(n - 2) for k in range(i + 1, n - 1)]


@lru_cache(maxsize=None)
def plaquette_index(n: int) -> np.ndarray:
    """``(P, 4, 2)`` array of the matrix coordinates of every plaquette's spins."""
    if n < 3:
        return np.zeros((0, 4, 2), dtype=np.intp)
    arr = np.array([p.spins() for p in enumerate_plaquettes(n)], dtype=np.intp)
    arr.setflags(write=False)
    return arr


def plaquette_syndromes(r) -> np.ndarray:
    """All plaquette syndromes in enumeration order; works on ``(..., n, n)`` stacks."""
    r = np.asarray(r)
    n = r.shape[-1]
    idx = plaquette_index(n)
    if idx.shape[0] == 0:
        return np.ones(r.shape[:-2] + (0,), dtype=np.int8)
    s = r[..., idx[:, 0, 0], idx[:, 0, 1]]
    for c in range(1, 4):
        s = s * r[..., idx[:, c, 0], idx[:, c, 1]]
    return s.astype(np.int8)


def weight3_syndromes(r) -> dict[tuple[int, int, int], int]:
    """Every weight-3 syndrome keyed by ``(i, j, k)`` with ``i < j < k``."""
    r = np.asarray(r)
    n = r.shape[0]
    return {
        (i, j, k): int(r[i, j]) * int(r[j, k]) * int(r[i, k])
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(j + 1, n)
    }


def is_code_state(r) -> bool:
    """True iff every plaquette check is satisfied."""
    r = np.asarray(r)
    return bool(np.all(plaquette_syndromes(r) == 1))


def is_code_state_batch(r: np.ndarray) -> np.ndarray:
    """Vectorised code-state test on a ``(B, n, n)`` stack.

    A matrix is a code state iff it equals the outer product of its first row.
    """
    r = np.asarray(r)
    first = r[:, 0, :]
    return np.all(r == first[:, :, None] * first[:, None, :], axis=(1, 2))


def extract_logical(r) -> np.ndarray:
    """Logical state read off the first row, normalised to ``Z_1 = +1``."""
    r = np.asarray(r)
    if not is_code_state(r):
        raise NotACodeStateError("extract_logical needs a code state")
    return r[0].astype(np.int8).copy()


def normalize_sign(Z) -> np.ndarray:
    Z = _as_logical(Z)
    return Z if Z[0] == 1 else -Z


def logical_error_count(r, target) -> int:
    """Logical errors of code state ``r`` against ``target``, modulo global flip."""
    Z = extract_logical(r)
    T = normalize_sign(target)
    if Z.shape != T.shape:
        raise ValueError("target length does not match n")
    d = int(np.count_nonzero(Z != T))
    return min(d, Z.size - d)


def logical_error_count_batch(r: np.ndarray, target) -> np.ndarray:
    """Logical-error counts for a stack of code states (no code check performed)."""
    T = normalize_sign(target)
    d = np.count_nonzero(np.asarray(r)[:, 0, :] != T[None, :], axis=1)
    return np.minimum(d, T.size - d)


def gauge_transform(r, g) -> SpinMatrix:
    """Element-wise product ``r o g`` with a code state ``g``."""
    r = np.asarray(r)
    g = np.asarray(g)
    if r.shape != g.shape:
        raise ValueError("shape mismatch")
    if not is_code_state(g):
        raise NotACodeStateError("gauge must be a code state")
    return SpinMatrix(r * g, validate=False)


def classify(r, target=None) -> Classification:
    r = np.asarray(r)
    if not is_code_state(r):
        return Classification("non_code")
    if target is None:
        return Classification("code")
    m = logical_error_count(r, target)
    if m == 0:
        return Classification("error_free", 0)
    return Classification("code", m)


# GF(2) views of the check families; +1 -> 0, -1 -> 1.

def _spin_column(n: int) -> dict[tuple[int, int], int]:
    iu = upper_indices(n)
    return {(int(a), int(b)): c for c, (a, b) in enumerate(zip(*iu))}


def plaquette_check_matrix(n: int) -> np.ndarray:
    """Binary ``P x M`` check matrix of the plaquette family."""
    col = _spin_column(n)
    plaqs = enumerate_plaquettes(n)
    H = np.zeros((len(plaqs), len(col)), dtype=np.uint8)
    for row, p in enumerate(plaqs):
        for s in p.physical_spins():
            H[row, col[s]] ^= 1
    return H


def weight3_check_matrix(n: int) -> np.ndarray:
    """Binary ``C(n,3) x M`` check matrix of the weight-3 family."""
    col = _spin_column(n)
    rows = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                v = np.zeros(len(col), dtype=np.uint8)
                v[[col[(i, j)], col[(j, k)], col[(i, k)]]] = 1
                rows.append(v)
    return np.array(rows, dtype=np.uint8).reshape(len(rows), len(col))
