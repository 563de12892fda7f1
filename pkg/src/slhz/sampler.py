"""Rejection-free Markov chain Monte Carlo on the SLHZ energy.

Every step evaluates the Metropolis weight ``min(1, exp(-dE))`` of all
single-spin flips and moves to one of them with probability proportional to
its weight, so the chain never stays put. Its stationary law is the
Boltzmann law reweighted by ``1 - s_k``, where ``s_k`` is the self-loop
probability that a uniform-proposal Metropolis chain would have in state k.
The chain also keeps the lowest-energy state it has visited.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from ._kernels import rf_steps
from .bf_decoder import DecoderConfig, DecodeResult, decode, decode_batch, outcome_codes
from .energy import (
    CouplingMatrix,
    Weights,
    logical_energy,
    plaquette_spins,
    slhz_energy,
    spin_plaquettes,
)
from .parity_code import (
    SpinMatrix,
    classify,
    encode,
    fill_symmetric,
    is_code_state_batch,
    num_physical,
    plaquette_syndromes,
    upper_indices,
)
from .seeding import child_seed

CHUNK = 1 << 16


@dataclass(frozen=True)
class ChainState:
    z: SpinMatrix
    energy: float
    step: int
    best_z: SpinMatrix
    best_energy: float
    rng_state: dict = field(repr=False, compare=False)


@dataclass(frozen=True)
class SamplerParams:
    """Chain settings; ``burn_in=None`` means ten sweeps (10 x physical spins)."""

    steps: int
    burn_in: int | None = None
    record_every: int = 1
    chains: int = 1
    seed: int = 0

    def resolved_burn_in(self, n: int) -> int:
        return 10 * num_physical(n) if self.burn_in is None else self.burn_in

    def readouts_per_chain(self, n: int) -> int:
        return max(self.steps - self.resolved_burn_in(n), 0) // self.record_every

    def validate(self, n: int) -> None:
        b = self.resolved_burn_in(n)
        if not self.steps >= b >= 0:
            raise ValueError("need steps >= burn_in >= 0")
        if self.record_every < 1 or self.chains < 1:
            raise ValueError("record_every and chains must be >= 1")


@dataclass
class Ensemble:
    """Recorded readouts, stored as upper-triangle spin rows."""

    n: int
    spins: np.ndarray
    energies: np.ndarray
    config: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.spins.shape[0]

    def matrices(self) -> np.ndarray:
        out = np.ones((len(self), self.n, self.n), dtype=np.int8)
        iu = upper_indices(self.n)
        out[:, iu[0], iu[1]] = self.spins
        out[:, iu[1], iu[0]] = self.spins
        return out


@dataclass(frozen=True)
class EnsembleStats:
    error_free_rate: float
    code_state_rate: float
    per_spin_error_prob: np.ndarray
    mean_error_prob: float


class _Chain:
    """Mutable working state shared by ``rf_step`` and ``run_chain``."""

    def __init__(self, J: CouplingMatrix, w: Weights, z: np.ndarray, rng: np.random.Generator):
        n = J.n
        self.n = n
        self.J = J
        self.w = w
        self.rng = rng
        self.J_up = np.ascontiguousarray(J.upper())
        self.spin_plaq = np.ascontiguousarray(spin_plaquettes(n))
        self.plaq_spins = np.ascontiguousarray(plaquette_spins(n)).reshape(-1, 4)
        self.spins = np.ascontiguousarray(z[upper_indices(n)].astype(np.int8))
        self.syndromes = plaquette_syndromes(z).astype(np.int8)
        self.counts = np.zeros(num_physical(n), dtype=np.int64)
        for f in range(num_physical(n)):
            for p in self.spin_plaq[f]:
                if p >= 0:
                    self.counts[f] += self.syndromes[p]
        e = slhz_energy(z, J, w)
        self.state = np.array([e, e, 0.0])
        self.best_spins = self.spins.copy()

    def advance(self, steps: int, burn_in: int, record_every: int, records, record_energies, n_recorded: int) -> int:
        done = 0
        while done < steps:
            k = min(CHUNK, steps - done)
            u = self.rng.random(k)
            n_recorded = rf_steps(
                self.spins,
                self.syndromes,
                self.counts,
                self.J_up,
                float(self.w.beta),
                float(self.w.gamma),
                self.spin_plaq,
                self.plaq_spins,
                u,
                self.state,
                self.best_spins,
                burn_in,
                record_every,
                records,
                record_energies,
                n_recorded,
            )
            done += k
        return n_recorded

    def matrix(self, spins: np.ndarray) -> SpinMatrix:
        return SpinMatrix(fill_symmetric(self.n, spins), validate=False)

    def snapshot(self) -> ChainState:
        return ChainState(
            z=self.matrix(self.spins),
            energy=float(self.state[0]),
            step=int(self.state[2]),
            best_z=self.matrix(self.best_spins),
            best_energy=float(self.state[1]),
            rng_state=self.rng.bit_generator.state,
        )


def _empty_records(m: int):
    return np.zeros((0, m), dtype=np.int8), np.zeros(0)


def init_chain(J: CouplingMatrix, w: Weights, seed: int) -> ChainState:
    """Chain at a uniformly random spin matrix."""
    rng = np.random.Generator(np.random.PCG64(seed))
    z = _random_spins(J.n, rng)
    return _Chain(J, w, z, rng).snapshot()


def _random_spins(n: int, rng: np.random.Generator) -> np.ndarray:
    vals = np.where(rng.random(num_physical(n)) < 0.5, -1, 1)
    return fill_symmetric(n, vals)


def rf_step(chain: ChainState, J: CouplingMatrix, w: Weights) -> ChainState:
    """One rejection-free move; returns the new chain state."""
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = chain.rng_state
    c = _Chain(J, w, np.asarray(chain.z), rng)
    c.state[:] = [chain.energy, chain.best_energy, chain.step]
    c.best_spins = np.ascontiguousarray(chain.best_z.upper())
    recs, energies = _empty_records(num_physical(J.n))
    c.advance(1, 0, 1, recs, energies, 0)
    return c.snapshot()


def run_chain(
    J: CouplingMatrix,
    w: Weights,
    steps: int,
    burn_in: int | None = None,
    record_every: int = 1,
    seed: int = 0,
) -> tuple[Ensemble, ChainState]:
    """Run one chain from a uniformly random start and record readouts.

    After step ``t`` (counted from 1) the state is recorded when
    ``t > burn_in`` and ``(t - burn_in) % record_every == 0``.
    """
    params = SamplerParams(steps, burn_in, record_every, 1, seed)
    params.validate(J.n)
    b = params.resolved_burn_in(J.n)
    rng = np.random.Generator(np.random.PCG64(seed))
    chain = _Chain(J, w, _random_spins(J.n, rng), rng)
    count = params.readouts_per_chain(J.n)
    records = np.zeros((count, num_physical(J.n)), dtype=np.int8)
    energies = np.zeros(count)
    got = chain.advance(steps, b, record_every, records, energies, 0)
    assert got == count
    config = {
        "beta": w.beta,
        "gamma": w.gamma,
        "steps": steps,
        "burn_in": b,
        "record_every": record_every,
        "seed": seed,
    }
    return Ensemble(J.n, records, energies, config), chain.snapshot()


def sample_ensemble(J: CouplingMatrix, w: Weights, params: SamplerParams, name: str = "chain") -> tuple[Ensemble, list[ChainState]]:
    """Run ``params.chains`` independent chains and pool their readouts."""
    params.validate(J.n)
    parts, finals = [], []
    for c in range(params.chains):
        seed = child_seed(params.seed, name, c)
        ens, final = run_chain(J, w, params.steps, params.resolved_burn_in(J.n), params.record_every, seed)
        parts.append(ens)
        finals.append(final)
    config = {
        "beta": w.beta,
        "gamma": w.gamma,
        "steps": params.steps,
        "burn_in": params.resolved_burn_in(J.n),
        "record_every": params.record_every,
        "chains": params.chains,
        "seed": params.seed,
    }
    spins = np.concatenate([e.spins for e in parts])
    energies = np.concatenate([e.energies for e in parts])
    return Ensemble(J.n, spins, energies, config), finals


def ensemble_stats(ens: Ensemble, target) -> EnsembleStats:
    """Error-frame statistics of an ensemble against a target logical state."""
    n = ens.n
    z = encode(target)
    errors = ens.spins * np.asarray(z)[upper_indices(n)][None, :]
    if len(ens) == 0:
        raise ValueError("empty ensemble")
    error_free = float(np.mean(np.all(errors == 1, axis=1)))
    code = float(np.mean(is_code_state_batch(ens.matrices())))
    marg = np.mean(errors == -1, axis=0)
    per_spin = fill_symmetric(n, marg, dtype=np.float64, diagonal=0.0)
    return EnsembleStats(error_free, code, per_spin, float(marg.mean()))


# Exact jump-chain oracle for tiny systems.

@dataclass(frozen=True)
class StationaryReport:
    tv_distance: float
    analytic_error: float
    stationary: np.ndarray
    empirical: np.ndarray
    energies: np.ndarray


def enumerate_states(n: int) -> np.ndarray:
    """All ``2^M`` spin matrices; bit f of the index set means spin f is -1."""
    m = num_physical(n)
    k = np.arange(1 << m)
    bits = (k[:, None] >> np.arange(m)[None, :]) & 1
    vals = np.where(bits == 1, -1, 1).astype(np.int8)
    out = np.ones((1 << m, n, n), dtype=np.int8)
    iu = upper_indices(n)
    out[:, iu[0], iu[1]] = vals
    out[:, iu[1], iu[0]] = vals
    return out


def jump_kernel(J: CouplingMatrix, w: Weights) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exact rejection-free kernel, state energies and Metropolis weight sums."""
    n = J.n
    m = num_physical(n)
    states = enumerate_states(n)
    E = np.array([slhz_energy(s, J, w) for s in states])
    K = len(E)
    P = np.zeros((K, K))
    W = np.zeros(K)
    for k in range(K):
        for f in range(m):
            l = k ^ (1 << f)
            P[k, l] = min(1.0, math.exp(-(E[l] - E[k])))
        W[k] = P[k].sum()
        P[k] /= W[k]
    return P, E, W


def stationary_vector(P: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(P.T)
    i = int(np.argmin(np.abs(vals - 1.0)))
    v = np.real(vecs[:, i])
    return v / v.sum()


def stationary_check(J: CouplingMatrix, w: Weights, steps: int, seed: int = 0) -> StationaryReport:
    """Compare a chain's visit frequencies with the exact jump-chain law.

    Also reports how far the kernel's stationary vector is from the closed
    form ``exp(-E_k) (1 - s_k)`` with ``s_k = 1 - W_k / M``.
    """
    n = J.n
    if n > 4:
        raise ValueError("stationary_check enumerates states; n must be <= 4")
    m = num_physical(n)
    P, E, W = jump_kernel(J, w)
    pi = stationary_vector(P)
    self_loop = 1.0 - W / m
    analytic = np.exp(-(E - E.min())) * (1.0 - self_loop)
    analytic /= analytic.sum()
    ens, _ = run_chain(J, w, steps, burn_in=0, record_every=1, seed=seed)
    idx = ((ens.spins == -1).astype(np.int64) << np.arange(m)[None, :]).sum(axis=1)
    emp = np.bincount(idx, minlength=1 << m) / len(idx)
    tv = 0.5 * float(np.abs(emp - pi).sum())
    return StationaryReport(tv, float(np.abs(analytic - pi).max()), pi, emp, E)


# Sweeps and the hybrid pipeline.

@dataclass
class SweepPoint:
    beta: float
    gamma: float
    readouts: int
    raw_error_free: float
    raw_code: float
    decoded_error_free: float
    decoded_code: float
    mean_error_prob: float
    best_energy: float

    def as_row(self) -> dict:
        return dict(self.__dict__)


def decode_ensemble(ens: Ensemble, cfg: DecoderConfig) -> np.ndarray:
    return decode_batch(ens.matrices(), cfg.max_rounds)


def sweep_point(J: CouplingMatrix, w: Weights, params: SamplerParams, target, cfg: DecoderConfig, index: int = 0) -> tuple[SweepPoint, Ensemble]:
    p = replace(params, seed=child_seed(params.seed, "sweep", index))
    ens, finals = sample_ensemble(J, w, p)
    stats = ensemble_stats(ens, target)
    decoded = decode_ensemble(ens, cfg)
    codes = outcome_codes(decoded, target)
    point = SweepPoint(
        beta=w.beta,
        gamma=w.gamma,
        readouts=len(ens),
        raw_error_free=stats.error_free_rate,
        raw_code=stats.code_state_rate,
        decoded_error_free=float(np.mean(codes == 0)),
        decoded_code=float(np.mean(codes >= 0)),
        mean_error_prob=stats.mean_error_prob,
        best_energy=min(f.best_energy for f in finals),
    )
    return point, ens


def param_sweep(
    J: CouplingMatrix,
    grid: Sequence[Weights],
    params: SamplerParams,
    target,
    cfg: DecoderConfig | None = None,
    threads: int = 1,
) -> list[SweepPoint]:
    """Raw and post-decode success rates at every weight pair of ``grid``."""
    cfg = cfg or DecoderConfig()

    def one(item):
        i, w = item
        return sweep_point(J, w, params, target, cfg, i)[0]

    items = list(enumerate(grid))
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, items))
    return [one(x) for x in items]


def best_points(points: Sequence[SweepPoint]) -> dict[str, SweepPoint]:
    """Grid points maximising raw and decoded success (first one wins ties)."""
    raw = max(points, key=lambda p: p.raw_error_free)
    dec = max(points, key=lambda p: p.decoded_error_free)
    return {"raw": raw, "decoded": dec}


def hard_decision(J: CouplingMatrix) -> SpinMatrix:
    """Spin matrix ``sgn(J_ij)``; a zero coupling maps to +1."""
    vals = np.where(J.upper() < 0, -1, 1)
    return SpinMatrix(fill_symmetric(J.n, vals), validate=False)


@dataclass
class HybridResult:
    Z: np.ndarray | None
    energy: float
    candidates: int
    baseline: DecodeResult
    baseline_Z: np.ndarray | None
    baseline_energy: float | None
    best_chain_energy: float
    details: dict[str, Any] = field(default_factory=dict)


def hybrid_solve(J: CouplingMatrix, w: Weights, params: SamplerParams, cfg: DecoderConfig | None = None, target=None) -> HybridResult:
    """Anneal then decode: the best decoded code state over all readouts.

    Every recorded readout and each chain's best-seen state is decoded; the
    code state of lowest logical energy wins. The hard-decision start
    ``sgn(J)`` is decoded as a baseline.
    """
    cfg = cfg or DecoderConfig()
    ens, finals = sample_ensemble(J, w, params, name="hybrid")
    pool = [ens.matrices()] + [np.asarray(f.best_z)[None] for f in finals]
    decoded = decode_batch(np.concatenate(pool), cfg.max_rounds)
    code = is_code_state_batch(decoded)
    best_Z, best_E = None, math.inf
    if code.any():
        Zs = decoded[code, 0, :].astype(np.float64)
        Zs = np.unique(Zs, axis=0)
        Jm = np.asarray(J)
        energies = -0.5 * np.einsum("bi,ij,bj->b", Zs, Jm, Zs)
        k = int(np.argmin(energies))
        best_Z = Zs[k].astype(np.int8)
        best_E = logical_energy(best_Z, J)
    baseline = decode(hard_decision(J), cfg, target=target, keep_trace=True)
    base_Z = None
    base_E = None
    if baseline.classification.is_code_state:
        base_Z = np.asarray(baseline.final)[0].astype(np.int8)
        base_E = logical_energy(base_Z, J)
    details = {}
    if target is not None and best_Z is not None:
        details["classification"] = classify(encode(best_Z), target).label()
    return HybridResult(
        Z=best_Z,
        energy=best_E,
        candidates=int(code.sum()),
        baseline=baseline,
        baseline_Z=base_Z,
        baseline_energy=base_E,
        best_chain_energy=min(f.best_energy for f in finals),
        details=details,
    )
