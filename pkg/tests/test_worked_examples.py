"""Small worked cases and qualitative checks across the modules."""
import math
import time

import numpy as np
import pytest

from slhz.bf_decoder import FIXED_POINT, decision_metric, decode, inversion_metric, iterate_rounds
from slhz.energy import (
    CouplingMatrix,
    Weights,
    delta_energy,
    logical_energy,
    slhz_energy,
    spin_plaquettes,
    violated_plaquettes,
)
from slhz.io import syndromes_to_text
from slhz.noise_channel import (
    logical_error_histogram,
    mlg_update_prob,
    mlg_update_table,
    random_error_matrix,
    round_saturation_sweep,
    sample_error_batch,
)
from slhz.oracle import brute_force_ground, random_instance
from slhz.parity_code import (
    SpinMatrix,
    encode,
    enumerate_plaquettes,
    extract_logical,
    gauge_transform,
    logical_error_count,
    num_physical,
    ones,
    syndrome3,
    syndrome4,
)
from slhz.sampler import (
    Ensemble,
    SamplerParams,
    ensemble_stats,
    hybrid_solve,
    run_chain,
    stationary_check,
)

from conftest import random_logical, random_spins


def test_encode_cases():
    assert encode([1, 1]) == ones(2)
    assert encode([1] * 5) == ones(5)
    r = np.asarray(encode([1, -1, 1]))
    assert r[0, 1] == -1 and r[0, 2] == 1 and r[1, 2] == -1


def test_syndrome_cases():
    r = np.asarray(ones(4)).copy()
    r[0, 1] = r[1, 0] = -1
    assert syndrome3(r, 0, 1, 2) == -1
    assert syndrome3(ones(4), 1, 2, 3) == 1


def test_plaquette_factorises_into_triangles():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(3, 10))
        r = random_spins(n, rng)
        for p in enumerate_plaquettes(n):
            i, k = p.i, p.k
            assert syndrome4(r, p) == syndrome3(r, i, i + 1, k + 1) * (
                syndrome3(r, i, i + 1, k) if k != i + 1 else 1
            )


def test_plaquette_counts():
    assert len(enumerate_plaquettes(3)) == 1
    assert len(enumerate_plaquettes(5)) == 6
    assert len(enumerate_plaquettes(14)) == 78
    assert num_physical(14) == 91


def test_logical_readout_cases():
    assert extract_logical(ones(4)).tolist() == [1, 1, 1, 1]
    assert extract_logical(encode([1, -1, -1])).tolist() == [1, -1, -1]
    assert extract_logical(encode([-1, 1, 1])).tolist() == [1, -1, -1]
    T = np.ones(5, dtype=int)
    assert logical_error_count(encode([1, 1, 1, -1, -1]), T) == 2
    assert logical_error_count(encode(-T), T) == 0


def test_gauge_cases():
    rng = np.random.default_rng(1)
    r = random_spins(6, rng)
    assert gauge_transform(r, ones(6)) == SpinMatrix(r)
    c = encode(random_logical(6, rng))
    assert gauge_transform(c, c) == ones(6)


def test_metric_cases():
    for n in (3, 5, 8):
        assert inversion_metric(ones(n), 0, 1) == n - 1
        assert decision_metric(ones(n), 0, 1) == n - 1
    r = np.asarray(ones(5)).copy()
    r[0, 1] = r[1, 0] = -1
    assert inversion_metric(r, 0, 1) == -2
    assert decision_metric(r, 0, 1) == 2


def test_code_state_decodes_immediately():
    Z = np.array([1, -1, 1, 1])
    res = decode(encode(Z), target=Z)
    assert res.rounds_used == 0 and res.terminated_by == FIXED_POINT
    assert res.classification.kind == "error_free"


def test_error_count_falls_on_successful_decodes():
    seen = 0
    for seed in range(40):
        e = np.asarray(random_error_matrix(40, 0.3, seed))
        counts = [int(np.count_nonzero(m == -1)) for m in iterate_rounds(e[None], 6)]
        if counts[-1] == 0:
            seen += 1
            first_zero = counts.index(0)
            assert all(a > b for a, b in zip(counts[:first_zero], counts[1 : first_zero + 1]))
    assert seen > 10


def test_high_noise_gives_logical_errors():
    t = logical_error_histogram(14, [0.45], trials=2000, rounds=7, seed=0)
    rows = {r.bucket: r.estimate for r in t.rows}
    wrong_code = sum(v for k, v in rows.items() if k not in ("0", "non_code"))
    assert wrong_code > 0.5 and wrong_code > rows["0"]
    low = logical_error_histogram(40, [0.1], trials=500, rounds=7, seed=0)
    assert {r.bucket: r.estimate for r in low.rows}["0"] > 0.99


def test_flip_fraction():
    e = sample_error_batch(40, 0.3, 10_000, np.random.default_rng(0))
    iu = np.triu_indices(40, 1)
    assert abs(np.mean(e[:, iu[0], iu[1]] == -1) - 0.3) < 0.01


def test_single_update_cases():
    assert mlg_update_prob(14, 0.0, 1000, np.random.default_rng(0)) == 1.0
    p14 = mlg_update_prob(14, 0.3, 10_000, np.random.default_rng(1))
    p40 = mlg_update_prob(40, 0.3, 10_000, np.random.default_rng(2))
    assert 0.5 < p14 < p40 < 1
    row = mlg_update_table([14], [0.0], trials=100, seed=0)[0]
    assert (row["P_correct"], row["P_incorrect"]) == (1.0, 0.0)


def test_round_zero_and_growth():
    t = round_saturation_sweep(12, [0.02, 0.2], trials=4000, rounds_max=6, seed=0)
    for p in (0.02, 0.2):
        exact = (1 - p) ** num_physical(12)
        row = t.cell(12, p, 0)
        assert abs(row.estimate - exact) < 4 * math.sqrt(exact * (1 - exact) / 4000) + 1e-12
        series = [t.cell(12, p, k).estimate for k in range(7)]
        assert all(b >= a for a, b in zip(series, series[1:]))


def test_energy_cases():
    J = random_instance(6, 0).J
    w = Weights(1.7, 2.3)
    assert slhz_energy(ones(6), J, w) == pytest.approx(-1.7 * J.upper().sum())
    z0 = CouplingMatrix(np.zeros((6, 6)))
    r = random_spins(6, np.random.default_rng(0))
    assert slhz_energy(r, z0, w) == pytest.approx(2.3 * violated_plaquettes(r))
    table = spin_plaquettes(6)
    for f, (i, j) in enumerate(zip(*np.triu_indices(6, 1))):
        held = int(np.count_nonzero(table[f] >= 0))
        assert delta_energy(ones(6), z0, w, (int(i), int(j))) == pytest.approx(2.3 * held)
        flipped = np.asarray(ones(6)).copy()
        flipped[i, j] = flipped[j, i] = -1
        assert delta_energy(ones(6), J, w, (i, j)) + delta_energy(flipped, J, w, (i, j)) == pytest.approx(0)


def test_logical_energy_cases():
    J = random_instance(7, 3).J
    Z = random_logical(7, np.random.default_rng(3))
    assert logical_energy(Z, J) == pytest.approx(logical_energy(-Z, J))
    assert logical_energy(Z, -J) == pytest.approx(-logical_energy(Z, J))
    assert logical_energy(Z, J) == pytest.approx(-np.dot(J.upper(), encode(Z).upper()))


def test_free_chain_is_uniform():
    rep = stationary_check(CouplingMatrix(np.zeros((3, 3))), Weights(1.0, 0.0), steps=1_000_000, seed=0)
    assert np.allclose(rep.stationary, 1 / 8)
    assert rep.tv_distance < 0.02


def test_ensemble_stats_cases():
    Z = np.array([1, -1, 1, 1, -1])
    row = encode(Z).upper()
    ens = Ensemble(5, np.tile(row, (4, 1)), np.zeros(4))
    st = ensemble_stats(ens, Z)
    assert st.error_free_rate == 1.0 and st.code_state_rate == 1.0 and st.mean_error_prob == 0.0
    J = random_instance(5, 0).J
    ens, _ = run_chain(J, Weights(1.0, 0.5), steps=5000, burn_in=0, seed=0)
    st = ensemble_stats(ens, Z)
    assert st.error_free_rate <= st.code_state_rate
    for f, (i, j) in enumerate(zip(*np.triu_indices(5, 1))):
        direct = sum(1 for s in ens.spins if s[f] != Z[i] * Z[j]) / len(ens)
        assert st.per_spin_error_prob[i, j] == pytest.approx(direct)


def test_easy_instance_hybrid():
    J = CouplingMatrix.from_upper(6, np.full(15, 0.2))
    res = hybrid_solve(J, Weights(5.0, 3.0), SamplerParams(steps=20_000, burn_in=2000, record_every=20), target=np.ones(6))
    assert res.baseline.classification.kind == "error_free"
    assert res.Z.tolist() == [1] * 6


def test_sampler_counts():
    J = random_instance(4, 0).J
    ens, _ = run_chain(J, Weights(1.0, 1.0), steps=123, burn_in=0, record_every=1)
    assert len(ens) == 123


def test_enumeration_speed():
    t0 = time.perf_counter()
    brute_force_ground(random_instance(14, 0).J)
    assert time.perf_counter() - t0 < 1.0


def test_code_state_dump_is_satisfied():
    text = syndromes_to_text(encode([1, -1, 1, -1, -1, 1]))
    assert set(text.split()[1]) == {"+"}
