"""Majority-logic multiple bit-flipping decoder over weight-3 checks.

Each round replaces every physical spin by the majority of its own value and
the ``n-2`` two-spin estimates ``r_ik r_kj`` routed through the other logical
indices. The whole round is one matrix product: ``G = r (r - I)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .parity_code import (
    Classification,
    SpinMatrix,
    classify,
    is_code_state_batch,
    logical_error_count_batch,
    normalize_sign,
)

FIXED_POINT = "fixed_point"
MAX_ROUNDS = "max_rounds"


@dataclass(frozen=True)
class DecoderConfig:
    max_rounds: int = 7
    tie_rule: str = "keep_current"

    def __post_init__(self):
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.tie_rule != "keep_current":
            raise ValueError("only the keep_current tie rule is supported")


@dataclass(frozen=True)
class DecodeResult:
    final: SpinMatrix
    rounds_used: int
    terminated_by: str
    classification: Classification
    trace: list[SpinMatrix] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        from .io import spin_matrix_to_json

        c = self.classification
        return {
            "final": spin_matrix_to_json(self.final),
            "rounds_used": self.rounds_used,
            "terminated_by": self.terminated_by,
            "classification": {"kind": c.kind, "logical_errors": c.logical_errors},
        }


def _pair(r: np.ndarray, i: int, j: int) -> None:
    n = r.shape[0]
    if i == j:
        raise ValueError("metric is defined for off-diagonal spins only")
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"({i}, {j}) out of range for n={n}")


def inversion_metric(r, i: int, j: int) -> int:
    """``1 + sum_k S3(i, j, k)``: confidence that ``r_ij`` is correct."""
    r = np.asarray(r)
    _pair(r, i, j)
    n = r.shape[0]
    rij = int(r[i, j])
    total = 1
    for k in range(n):
        if k != i and k != j:
            total += rij * int(r[j, k]) * int(r[i, k])
    return total


def decision_metric(r, i: int, j: int) -> int:
    """``r_ij + sum_{k != i,j} r_ik r_kj``; its sign is the majority vote."""
    r = np.asarray(r)
    _pair(r, i, j)
    n = r.shape[0]
    total = int(r[i, j])
    for k in range(n):
        if k != i and k != j:
            total += int(r[i, k]) * int(r[k, j])
    return total


def decision_matrix(r) -> np.ndarray:
    """All decision metrics at once, ``r @ r - r``; accepts ``(..., n, n)`` stacks.

    Off-diagonal entries are the metrics; the diagonal is meaningless.
    """
    r = np.asarray(r)
    # float32 BLAS is exact for these small integer sums
    f = r.astype(np.float32)
    return (f @ f - f).astype(np.int32)


def bf_round_array(r: np.ndarray) -> np.ndarray:
    """One simultaneous flip round on an array or ``(B, n, n)`` stack."""
    r = np.asarray(r)
    G = decision_matrix(r)
    out = np.where(G > 0, 1, np.where(G < 0, -1, r)).astype(np.int8)
    n = r.shape[-1]
    out[..., np.arange(n), np.arange(n)] = 1
    return out


def bf_round(r) -> SpinMatrix:
    return SpinMatrix(bf_round_array(np.asarray(r)), validate=False)


def decode(r, cfg: DecoderConfig | None = None, target=None, keep_trace: bool = False) -> DecodeResult:
    """Iterate flip rounds until a fixed point or ``cfg.max_rounds`` rounds."""
    cfg = cfg or DecoderConfig()
    cur = np.asarray(r).astype(np.int8)
    trace = [SpinMatrix(cur, validate=False)] if keep_trace else []
    rounds = 0
    terminated = MAX_ROUNDS
    for _ in range(cfg.max_rounds):
        nxt = bf_round_array(cur)
        if np.array_equal(nxt, cur):
            terminated = FIXED_POINT
            break
        cur = nxt
        rounds += 1
        if keep_trace:
            trace.append(SpinMatrix(cur, validate=False))
    final = SpinMatrix(cur, validate=False)
    return DecodeResult(final, rounds, terminated, classify(final, target), trace)


def iterate_rounds(r: np.ndarray, rounds: int) -> Iterator[np.ndarray]:
    """Yield the stack before any decoding and after each of ``rounds`` rounds.

    Rounds beyond a fixed point leave the stack unchanged, which matches
    early termination in :func:`decode`.
    """
    cur = np.asarray(r).astype(np.int8)
    yield cur
    for _ in range(rounds):
        cur = bf_round_array(cur)
        yield cur


def decode_batch(r: np.ndarray, max_rounds: int) -> np.ndarray:
    """Final states of ``max_rounds`` rounds applied to a ``(B, n, n)`` stack."""
    cur = np.asarray(r).astype(np.int8)
    for _ in range(max_rounds):
        nxt = bf_round_array(cur)
        if np.array_equal(nxt, cur):
            break
        cur = nxt
    return cur


def outcome_codes(r: np.ndarray, target=None) -> np.ndarray:
    """Per-matrix outcome: logical-error count for code states, -1 for non-code.

    Without a target the code states are reported as 0 logical errors
    against the all-ones frame, i.e. the error frame is assumed.
    """
    r = np.asarray(r)
    n = r.shape[-1]
    T = np.ones(n, dtype=np.int8) if target is None else normalize_sign(target)
    code = is_code_state_batch(r)
    m = logical_error_count_batch(r, T)
    return np.where(code, m, -1)
