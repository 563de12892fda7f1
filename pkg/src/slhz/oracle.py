"""Random spin-glass instances and exhaustive ground-state search."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energy import CouplingMatrix, logical_energy
from .parity_code import num_physical

MAX_BRUTE_N = 26
CHUNK = 1 << 16


@dataclass(frozen=True)
class GroundState:
    Z: np.ndarray
    energy: float
    unique: bool


@dataclass(frozen=True)
class ProblemInstance:
    J: CouplingMatrix
    seed: int
    ground: GroundState | None = None

    @property
    def n(self) -> int:
        return self.J.n

    def solved(self) -> "ProblemInstance":
        return self if self.ground is not None else ProblemInstance(self.J, self.seed, brute_force_ground(self.J))


def random_instance(n: int, seed: int) -> ProblemInstance:
    """Couplings i.i.d. uniform on [-1/4, 1/4]."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    vals = rng.uniform(-0.25, 0.25, size=num_physical(n))
    return ProblemInstance(CouplingMatrix.from_upper(n, vals), seed)


def brute_force_ground(J: CouplingMatrix, tol: float = 1e-12) -> GroundState:
    """Exact minimiser of ``-sum J_ij Z_i Z_j`` with ``Z_1 = +1``.

    All ``2^(n-1)`` states are scored in vectorised chunks. Ties within
    ``tol`` go to the lexicographically smallest Z (-1 < +1); ``unique`` is
    False when a second state ties with the minimum.
    """
    n = J.n
    if n > MAX_BRUTE_N:
        raise ValueError(f"brute force limited to n <= {MAX_BRUTE_N}")
    Jm = np.asarray(J)
    free = n - 1
    count = 1 << free
    shifts = np.arange(free, dtype=np.int64)
    energies = np.empty(count)
    for start in range(0, count, CHUNK):
        k = np.arange(start, min(start + CHUNK, count), dtype=np.int64)
        energies[start : start + k.size] = _energies(_states(k, shifts, n), Jm)
    emin = energies.min()
    ties = np.flatnonzero(energies <= emin + tol)
    states = _states(ties.astype(np.int64), shifts, n)
    best = min(states, key=lambda z: tuple(int(v) for v in z)).astype(np.int8)
    return GroundState(best, logical_energy(best, J), len(ties) == 1)


def _states(k: np.ndarray, shifts: np.ndarray, n: int) -> np.ndarray:
    # bit b of k set means Z[b+1] = -1
    Z = np.ones((k.size, n))
    Z[:, 1:] = np.where((k[:, None] >> shifts[None, :]) & 1, -1.0, 1.0)
    return Z


def _energies(Z: np.ndarray, J: np.ndarray) -> np.ndarray:
    return -0.5 * np.einsum("bi,bi->b", Z @ J, Z)


def unique_instance(n: int, seed: int, max_tries: int = 1000) -> ProblemInstance:
    """First instance at or after ``seed`` whose ground state is unique up to global flip."""
    for s in range(seed, seed + max_tries):
        inst = random_instance(n, s).solved()
        if inst.ground.unique:
            return inst
    raise RuntimeError("no non-degenerate instance found")
