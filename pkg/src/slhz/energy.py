"""SLHZ energy: weighted coupling correlation plus a plaquette penalty.

    H(z) = -beta * sum_{i<j} J_ij z_ij + gamma * sum_plaquettes (1 - S4(z)) / 2

Temperature is folded into ``beta`` and ``gamma``; Boltzmann weights are
``exp(-H)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .parity_code import (
    _as_logical,
    num_physical,
    plaquette_index,
    plaquette_syndromes,
    upper_indices,
)


@dataclass(frozen=True)
class Weights:
    """Correlation weight ``beta`` and penalty weight ``gamma``.

    Zero is accepted here so degenerate models can be built in checks;
    experiment configs require both strictly positive.
    """

    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ValueError(f"{name} must be finite and non-negative, got {v}")


class CouplingMatrix:
    """Symmetric real coupling matrix with zero diagonal."""

    __slots__ = ("_J",)

    def __init__(self, J):
        J = np.array(J, dtype=np.float64, copy=True)
        if J.ndim != 2 or J.shape[0] != J.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.array_equal(J, J.T):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diagonal(J) != 0):
            raise ValueError("coupling matrix diagonal must be zero")
        if not np.all(np.isfinite(J)):
            raise ValueError("couplings must be finite")
        J.setflags(write=False)
        self._J = J

    @classmethod
    def from_upper(cls, n: int, values) -> "CouplingMatrix":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (num_physical(n),):
            raise ValueError(f"expected {num_physical(n)} couplings for n={n}")
        J = np.zeros((n, n))
        iu = upper_indices(n)
        J[iu] = values
        J[iu[1], iu[0]] = values
        return cls(J)

    @property
    def n(self) -> int:
        return self._J.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._J

    def upper(self) -> np.ndarray:
        return self._J[upper_indices(self.n)]

    def __neg__(self) -> "CouplingMatrix":
        return CouplingMatrix(-self._J)

    def gauge(self, g) -> "CouplingMatrix":
        return CouplingMatrix(self._J * np.asarray(g))

    def __array__(self, dtype=None, copy=None):
        return self._J if dtype is None else self._J.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, CouplingMatrix):
            return NotImplemented
        return np.array_equal(self._J, other._J)

    def __repr__(self):
        return f"CouplingMatrix(n={self.n})"


def _dims(z: np.ndarray, J: np.ndarray) -> None:
    if z.shape[-2:] != J.shape:
        raise ValueError(f"dimension mismatch: spins {z.shape[-2:]} vs couplings {J.shape}")


def correlation(z, J) -> np.ndarray | float:
    """``sum_{i<j} J_ij z_ij``; works on ``(..., n, n)`` stacks."""
    z = np.asarray(z)
    J = np.asarray(J)
    _dims(z, J)
    iu = upper_indices(J.shape[0])
    return (z[..., iu[0], iu[1]] * J[iu]).sum(axis=-1)


def violated_plaquettes(z) -> np.ndarray | int:
    s = plaquette_syndromes(z)
    return np.count_nonzero(s < 0, axis=-1)


def slhz_energy(z, J, w: Weights) -> float:
    z = np.asarray(z)
    J = np.asarray(J)
    _dims(z, J)
    return float(-w.beta * correlation(z, J) + w.gamma * violated_plaquettes(z))


def slhz_energy_batch(z: np.ndarray, J, w: Weights) -> np.ndarray:
    return -w.beta * correlation(z, J) + w.gamma * violated_plaquettes(z)


@lru_cache(maxsize=None)
def spin_plaquettes(n: int) -> np.ndarray:
    """``(M, 4)`` table: plaquettes containing each physical spin, padded with -1.

    Spins are in upper-triangle order; a spin sits in at most four plaquettes.
    """
    idx = plaquette_index(n)
    col = {(int(a), int(b)): c for c, (a, b) in enumerate(zip(*upper_indices(n)))}
    table = -np.ones((num_physical(n), 4), dtype=np.int64)
    fill = np.zeros(num_physical(n), dtype=np.int64)
    for p in range(idx.shape[0]):
        for a, b in idx[p]:
            if a == b:
                continue
            c = col[(min(a, b), max(a, b))]
            table[c, fill[c]] = p
            fill[c] += 1
    table.setflags(write=False)
    return table


@lru_cache(maxsize=None)
def plaquette_spins(n: int) -> np.ndarray:
    """``(P, 4)`` table: physical-spin columns of each plaquette, -1 for the ancilla."""
    idx = plaquette_index(n)
    col = {(int(a), int(b)): c for c, (a, b) in enumerate(zip(*upper_indices(n)))}
    table = -np.ones((idx.shape[0], 4), dtype=np.int64)
    for p in range(idx.shape[0]):
        for s, (a, b) in enumerate(idx[p]):
            if a != b:
                table[p, s] = col[(min(a, b), max(a, b))]
    table.setflags(write=False)
    return table


def delta_energy(z, J, w: Weights, flip: tuple[int, int]) -> float:
    """Energy change from flipping physical spin ``flip = (i, j)``, in O(1).

    Flipping ``z_ij`` negates its correlation term and every syndrome of the
    plaquettes holding it, so the change is
    ``2 beta J_ij z_ij + gamma * sum_{p containing ij} S4_p``.
    """
    z = np.asarray(z)
    J = np.asarray(J)
    _dims(z, J)
    i, j = flip
    if i == j:
        raise ValueError("cannot flip an ancilla spin")
    i, j = min(i, j), max(i, j)
    n = z.shape[0]
    col = _column(n, i, j)
    idx = plaquette_index(n)
    s4 = 0
    for p in spin_plaquettes(n)[col]:
        if p < 0:
            break
        spins = idx[p]
        s4 += int(np.prod(z[spins[:, 0], spins[:, 1]]))
    return float(2 * w.beta * J[i, j] * z[i, j] + w.gamma * s4)


def _column(n: int, i: int, j: int) -> int:
    # row-major upper-triangle position of (i, j), i < j
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def logical_energy(Z, J) -> float:
    """``-sum_{i<j} J_ij Z_i Z_j``."""
    Z = _as_logical(Z).astype(np.float64)
    J = np.asarray(J)
    if J.shape != (Z.size, Z.size):
        raise ValueError("dimension mismatch")
    return float(-0.5 * (Z @ J @ Z))
