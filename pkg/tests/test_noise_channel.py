import math

import numpy as np
import pytest

from slhz.bf_decoder import bf_round_array, decode_batch
from slhz.noise_channel import (
    binomial_stderr,
    extrinsic_prob,
    failure_prob_sweep,
    fig4_grid,
    logical_error_histogram,
    mlg_update_prob,
    mlg_update_table,
    round_saturation_sweep,
    sample_error_batch,
)
from slhz.parity_code import encode

from conftest import random_logical

# Exact values from an independent enumeration of all error patterns at p = 0.2
EXACT_FAILURE_P02 = {2: 0.2, 3: 0.488, 4: 0.344576, 5: 0.5067497472}
EXACT_FIRST_ROUND_N4_P02 = 0.81056


def test_extrinsic_prob():
    assert extrinsic_prob(0.3) == pytest.approx(0.58)
    assert extrinsic_prob(0.0) == 1.0 and extrinsic_prob(0.5) == 0.5 and extrinsic_prob(1.0) == 1.0


def test_p_zero_and_one():
    t = failure_prob_sweep([6], [0.0], trials=200)
    assert t.rows[0].estimate == 0.0
    e = sample_error_batch(6, 1.0, 3, np.random.default_rng(0))
    assert np.all(e[:, 0, 1] == -1)
    # all spins wrong: every extrinsic vote is +1 and outvotes the intrinsic one
    out = decode_batch(e, 5)
    assert np.all(out == 1)


def test_n2_failure_is_p():
    t = failure_prob_sweep([2], [0.2], trials=20000, seed=3)
    row = t.rows[0]
    assert abs(row.estimate - 0.2) < 4 * math.sqrt(0.2 * 0.8 / 20000)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_failure_matches_enumeration(n):
    trials = 20000
    row = failure_prob_sweep([n], [0.2], trials=trials, max_rounds=5, seed=1).rows[0]
    exact = EXACT_FAILURE_P02[n]
    assert abs(row.estimate - exact) < 4 * math.sqrt(exact * (1 - exact) / trials)


def test_mlg_update_prob_matches_enumeration():
    trials = 400000
    est = mlg_update_prob(4, 0.2, trials, np.random.default_rng(5))
    sigma = math.sqrt(EXACT_FIRST_ROUND_N4_P02 * (1 - EXACT_FIRST_ROUND_N4_P02) / trials)
    assert abs(est - EXACT_FIRST_ROUND_N4_P02) < 4 * sigma


def test_mlg_update_prob_matches_real_round():
    # the coin-toss model agrees with one real decoder round on a single spin
    rng = np.random.default_rng(9)
    e = sample_error_batch(12, 0.3, 40000, rng)
    real = float(np.mean(bf_round_array(e)[:, 0, 1] == 1))
    est = mlg_update_prob(12, 0.3, 400000, np.random.default_rng(10))
    assert abs(real - est) < 4 * math.sqrt(est * (1 - est) / 40000) + 0.002


def test_histogram_buckets_sum_to_one():
    t = logical_error_histogram(12, [0.15, 0.3], trials=1500, rounds=5, seed=2)
    for p in (0.15, 0.3):
        rows = [r for r in t.rows if math.isclose(r.p, p)]
        assert [r.bucket for r in rows] == [str(m) for m in range(7)] + ["non_code"]
        assert sum(r.estimate for r in rows) == pytest.approx(1.0)


def test_saturation_rows_and_monotone_start():
    t = round_saturation_sweep(20, [0.1], trials=500, rounds_max=4, seed=0)
    assert [r.rounds for r in t.rows] == [0, 1, 2, 3, 4]
    assert t.rows[-1].estimate >= t.rows[0].estimate


def test_seed_determinism_and_threads():
    a = failure_prob_sweep([8, 12], [0.1, 0.2], trials=2500, seed=4)
    b = failure_prob_sweep([8, 12], [0.1, 0.2], trials=2500, seed=4, threads=4)
    c = failure_prob_sweep([8, 12], [0.1, 0.2], trials=2500, seed=5)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv() != c.to_csv()


def test_cells_are_independent_of_grid():
    a = failure_prob_sweep([10], [0.2], trials=1000, seed=8)
    b = failure_prob_sweep([6, 10], [0.05, 0.2], trials=1000, seed=8)
    assert a.rows[0].estimate == b.cell(10, 0.2).estimate


def test_random_gauge_gives_same_failure_rate():
    # decoding r = Z Z^T o e against encode(Z) is the same event as decoding e
    rng = np.random.default_rng(11)
    n, trials = 10, 3000
    e = sample_error_batch(n, 0.2, trials, rng)
    plain = ~np.all(decode_batch(e, 5) == 1, axis=(1, 2))
    gauges = np.stack([np.asarray(encode(random_logical(n, rng))) for _ in range(trials)])
    gauged = ~np.all(decode_batch(e * gauges, 5) == gauges, axis=(1, 2))
    assert np.array_equal(plain, gauged)


def test_fig4_grid_and_table():
    g = fig4_grid()
    assert len(g) == 50 and g[0] > 0 and g[-1] < 0.5
    rows = mlg_update_table([14], g[:3], trials=1000, seed=0)
    assert all(r["P_correct"] + r["P_incorrect"] == pytest.approx(1.0) for r in rows)
    assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
