import itertools

import numpy as np
import pytest

from slhz.energy import CouplingMatrix, Weights, logical_energy, slhz_energy
from slhz.oracle import brute_force_ground, random_instance, unique_instance
from slhz.parity_code import encode


def test_ferromagnet_n3():
    J = CouplingMatrix.from_upper(3, [1.0, 1.0, 1.0])
    g = brute_force_ground(J)
    assert g.Z.tolist() == [1, 1, 1] and g.energy == -3.0 and g.unique


def test_degenerate_ties_pick_smallest():
    g = brute_force_ground(CouplingMatrix(np.zeros((4, 4))))
    assert not g.unique
    assert g.Z.tolist() == [1, -1, -1, -1]


@pytest.mark.parametrize("seed", range(5))
def test_optimality_certificate(seed):
    inst = random_instance(9, seed)
    g = brute_force_ground(inst.J)
    best = min(logical_energy((1,) + z, inst.J) for z in itertools.product([1, -1], repeat=8))
    assert g.energy == pytest.approx(best, abs=1e-12)
    assert g.Z[0] == 1


def test_random_instance_range_and_determinism():
    a, b = random_instance(12, 4), random_instance(12, 4)
    assert a.J == b.J
    u = a.J.upper()
    assert np.all(np.abs(u) <= 0.25)


def test_ground_is_lowest_code_state():
    inst = unique_instance(6, 0)
    w = Weights(3.0, 2.0)
    energies = {
        (1,) + z: slhz_energy(encode((1,) + z), inst.J, w) for z in itertools.product([1, -1], repeat=5)
    }
    best = min(energies, key=energies.get)
    assert list(best) == inst.ground.Z.tolist()
    assert inst.ground.unique


def test_brute_force_limit():
    with pytest.raises(ValueError):
        brute_force_ground(CouplingMatrix(np.zeros((30, 30))))
