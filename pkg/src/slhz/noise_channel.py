"""Binary symmetric channel experiments for the bit-flipping decoder.

All sweeps work in the error frame: the target is the all-ones matrix, and a
sampled matrix is the error pattern itself. Randomness is fanned out per
(cell, block of trials) from a master seed, so results do not depend on
thread count or on which other cells are in the grid.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bf_decoder import decode_batch, iterate_rounds, outcome_codes
from .parity_code import SpinMatrix, fill_symmetric, num_physical, upper_indices
from .seeding import rng_for

BLOCK = 1000


@dataclass(frozen=True)
class BscParams:
    p: float
    n: int
    trials: int = 5000
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class SweepRow:
    n: int
    p: float
    rounds: int
    trials: int
    estimate: float
    stderr: float
    bucket: str | None = None


@dataclass
class SweepTable:
    kind: str
    rows: list[SweepRow] = field(default_factory=list)

    def cell(self, n: int, p: float, rounds: int | None = None, bucket: str | None = None) -> SweepRow:
        for row in self.rows:
            if row.n == n and math.isclose(row.p, p) and (rounds is None or row.rounds == rounds):
                if bucket is None or row.bucket == bucket:
                    return row
        raise KeyError((n, p, rounds, bucket))

    def to_csv(self) -> str:
        with_bucket = any(r.bucket is not None for r in self.rows)
        cols = ["n", "p", "rounds", "trials", "estimate", "stderr"] + (["bucket"] if with_bucket else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            d = asdict(r)
            w.writerow([_fmt(d[c]) for c in cols])
        return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return "" if v is None else str(v)


def binomial_stderr(estimate: float, trials: int) -> float:
    return math.sqrt(max(estimate * (1 - estimate), 0.0) / trials)


def sample_error_batch(n: int, p: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``(count, n, n)`` stack of i.i.d. error matrices, each spin -1 with probability p."""
    m = num_physical(n)
    flips = rng.random((count, m)) < p
    vals = np.where(flips, -1, 1).astype(np.int8)
    out = np.ones((count, n, n), dtype=np.int8)
    iu = upper_indices(n)
    out[:, iu[0], iu[1]] = vals
    out[:, iu[1], iu[0]] = vals
    return out


def sample_error_matrix(params: BscParams, rng: np.random.Generator) -> SpinMatrix:
    return SpinMatrix(sample_error_batch(params.n, params.p, 1, rng)[0], validate=False)


def extrinsic_prob(p: float) -> float:
    """Probability that a two-spin product ``e_ik e_kj`` is +1 under i.i.d. flips."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return 0.5 * (1 + (1 - 2 * p) ** 2)


def mlg_update_prob(n: int, p: float, trials: int, rng: np.random.Generator) -> float:
    """Coin-toss estimate of P(e'_ij = +1) after one majority update.

    One intrinsic coin (+1 w.p. 1-p) votes with ``n-2`` extrinsic coins
    (+1 w.p. ``extrinsic_prob(p)``); the extrinsic head count is drawn as a
    binomial. A tied vote keeps the intrinsic value.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    intrinsic = np.where(rng.random(trials) < 1 - p, 1, -1)
    heads = rng.binomial(n - 2, extrinsic_prob(p), size=trials)
    total = intrinsic + 2 * heads - (n - 2)
    outcome = np.where(total > 0, 1, np.where(total < 0, -1, intrinsic))
    return float(np.mean(outcome == 1))


def _p_key(p: float) -> int:
    return int(round(p * 1e9))


def _blocks(trials: int):
    start = 0
    b = 0
    while start < trials:
        size = min(BLOCK, trials - start)
        yield b, size
        start += size
        b += 1


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _failure_cell(n: int, p: float, trials: int, max_rounds: int, seed: int) -> int:
    failures = 0
    for b, size in _blocks(trials):
        rng = rng_for(seed, "bsc-failure", n, _p_key(p), b)
        e = sample_error_batch(n, p, size, rng)
        final = decode_batch(e, max_rounds)
        failures += int(np.count_nonzero(~np.all(final == 1, axis=(1, 2))))
    return failures


def failure_prob_sweep(
    n_values: Sequence[int],
    p_values: Sequence[float],
    trials: int = 5000,
    max_rounds: int = 5,
    seed: int = 0,
    threads: int = 1,
) -> SweepTable:
    """Fraction of error matrices not decoded to all-ones within ``max_rounds``."""
    if any(n < 2 for n in n_values):
        raise ValueError("all n must be >= 2")
    cells = [(n, float(p)) for n in n_values for p in p_values]
    counts = _map(lambda c: _failure_cell(c[0], c[1], trials, max_rounds, seed), cells, threads)
    table = SweepTable("failure")
    for (n, p), k in zip(cells, counts):
        est = k / trials
        table.rows.append(SweepRow(n, p, max_rounds, trials, est, binomial_stderr(est, trials)))
    return table


def _rounds_cell(n: int, p: float, trials: int, rounds: int, seed: int):
    """Per-round error-free counts and the outcome histogram after ``rounds``."""
    per_round = np.zeros(rounds + 1, dtype=np.int64)
    outcomes = []
    for b, size in _blocks(trials):
        rng = rng_for(seed, "bsc-rounds", n, _p_key(p), b)
        e = sample_error_batch(n, p, size, rng)
        for t, cur in enumerate(iterate_rounds(e, rounds)):
            per_round[t] += int(np.count_nonzero(np.all(cur == 1, axis=(1, 2))))
        outcomes.append(outcome_codes(cur))
    return per_round, np.concatenate(outcomes)


def round_saturation_sweep(
    n: int,
    p_values: Sequence[float],
    trials: int = 5000,
    rounds_max: int = 7,
    seed: int = 0,
    threads: int = 1,
) -> SweepTable:
    """Fraction of error-free matrices after 0..rounds_max rounds, per p."""
    ps = [float(p) for p in p_values]
    results = _map(lambda p: _rounds_cell(n, p, trials, rounds_max, seed), ps, threads)
    table = SweepTable("round_saturation")
    for p, (per_round, _) in zip(ps, results):
        for t, k in enumerate(per_round):
            est = int(k) / trials
            table.rows.append(SweepRow(n, p, t, trials, est, binomial_stderr(est, trials)))
    return table


def histogram_rows(n: int, p: float, rounds: int, outcomes: np.ndarray) -> list[SweepRow]:
    """Buckets 0..n//2 logical errors plus ``non_code``; fractions sum to one."""
    trials = outcomes.size
    rows = []
    for m in range(n // 2 + 1):
        est = int(np.count_nonzero(outcomes == m)) / trials
        rows.append(SweepRow(n, p, rounds, trials, est, binomial_stderr(est, trials), str(m)))
    est = int(np.count_nonzero(outcomes < 0)) / trials
    rows.append(SweepRow(n, p, rounds, trials, est, binomial_stderr(est, trials), "non_code"))
    return rows


def logical_error_histogram(
    n: int,
    p_values: Sequence[float],
    trials: int = 5000,
    rounds: int = 7,
    seed: int = 0,
    threads: int = 1,
) -> SweepTable:
    """Distribution of decoded outcomes by logical-error count, per p."""
    ps = [float(p) for p in p_values]
    results = _map(lambda p: _rounds_cell(n, p, trials, rounds, seed), ps, threads)
    table = SweepTable("logical_errors")
    for p, (_, outcomes) in zip(ps, results):
        table.rows.extend(histogram_rows(n, p, rounds, outcomes))
    return table


def fig4_grid(points: int = 50) -> np.ndarray:
    """Evenly spaced p strictly inside (0, 1/2)."""
    return 0.5 * np.arange(1, points + 1) / (points + 1)


def mlg_update_table(n_values: Sequence[int], p_values: Sequence[float], trials: int, seed: int) -> list[dict]:
    rows = []
    for n in n_values:
        for p in p_values:
            rng = rng_for(seed, "fig4", n, _p_key(float(p)))
            est = mlg_update_prob(n, float(p), trials, rng)
            rows.append(
                {
                    "p": float(p),
                    "n": n,
                    "trials": trials,
                    "P_correct": est,
                    "P_incorrect": 1.0 - est,
                    "stderr": binomial_stderr(est, trials),
                }
            )
    return rows


def random_error_matrix(n: int, p: float, seed: int) -> SpinMatrix:
    rng = rng_for(seed, "error-matrix", n, _p_key(p))
    vals = np.where(rng.random(num_physical(n)) < p, -1, 1)
    return SpinMatrix(fill_symmetric(n, vals), validate=False)
