import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slhz.energy import (
    CouplingMatrix,
    Weights,
    correlation,
    delta_energy,
    logical_energy,
    slhz_energy,
    slhz_energy_batch,
    violated_plaquettes,
)
from slhz.oracle import random_instance
from slhz.parity_code import encode, is_code_state, upper_indices

from conftest import random_logical, random_spins


def test_weights_validation():
    Weights(0.0, 0.0)
    for bad in ((-1.0, 1.0), (1.0, float("nan")), (float("inf"), 1.0)):
        with pytest.raises(ValueError):
            Weights(*bad)


def test_coupling_validation():
    with pytest.raises(ValueError):
        CouplingMatrix([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        CouplingMatrix([[1, 0], [0, 0]])
    J = CouplingMatrix.from_upper(3, [0.1, -0.2, 0.3])
    assert np.array_equal((-J).upper(), -J.upper())
    with pytest.raises(ValueError):
        J.matrix[0, 1] = 5


def test_energy_by_hand():
    J = CouplingMatrix.from_upper(3, [1.0, 2.0, -1.0])
    z = np.array([[1, 1, -1], [1, 1, 1], [-1, 1, 1]])
    # correlation 1 - 2 - 1 = -2; the single plaquette is the triangle, product -1
    assert correlation(z, J) == -2
    assert violated_plaquettes(z) == 1
    assert slhz_energy(z, J, Weights(2.0, 3.0)) == pytest.approx(4.0 + 3.0)


def test_delta_matches_full_recompute():
    rng = np.random.default_rng(21)
    for _ in range(1000):
        n = int(rng.integers(2, 12))
        J = random_instance(n, int(rng.integers(1 << 30))).J
        w = Weights(float(rng.uniform(0, 5)), float(rng.uniform(0, 5)))
        z = random_spins(n, rng)
        i, j = sorted(rng.choice(n, 2, replace=False))
        z2 = z.copy()
        z2[i, j] = z2[j, i] = -z[i, j]
        full = slhz_energy(z2, J, w) - slhz_energy(z, J, w)
        assert abs(delta_energy(z, J, w, (int(i), int(j))) - full) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_gauge_invariance(n, seed):
    rng = np.random.default_rng(seed)
    J = random_instance(n, seed).J
    w = Weights(1.3, 0.7)
    z = random_spins(n, rng)
    g = np.asarray(encode(random_logical(n, rng)))
    assert slhz_energy(z * g, J.gauge(g), w) == pytest.approx(slhz_energy(z, J, w), abs=1e-12)


def test_code_states_carry_logical_energy():
    rng = np.random.default_rng(3)
    for n in range(2, 11):
        J = random_instance(n, n).J
        w = Weights(2.5, 4.0)
        for _ in range(20):
            Z = random_logical(n, rng)
            z = encode(Z)
            assert violated_plaquettes(z) == 0
            assert slhz_energy(z, J, w) == pytest.approx(2.5 * logical_energy(Z, J), abs=1e-12)


def test_penalty_nonnegative_and_zero_only_on_code():
    rng = np.random.default_rng(4)
    for _ in range(300):
        n = int(rng.integers(3, 9))
        z = random_spins(n, rng)
        v = violated_plaquettes(z)
        assert v >= 0
        assert (v == 0) == is_code_state(z)


def test_batch_agrees():
    rng = np.random.default_rng(5)
    J = random_instance(7, 0).J
    w = Weights(1.0, 2.0)
    stack = np.stack([random_spins(7, rng) for _ in range(10)])
    assert np.allclose(slhz_energy_batch(stack, J, w), [slhz_energy(z, J, w) for z in stack])


def test_logical_energy_sum():
    J = random_instance(5, 1).J
    Z = np.array([1, -1, 1, 1, -1])
    iu = upper_indices(5)
    assert logical_energy(Z, J) == pytest.approx(-np.sum(np.asarray(J)[iu] * np.outer(Z, Z)[iu]))
