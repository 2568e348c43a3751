import itertools

import numpy as np
import pytest

from doqaoa.graphs import Graph
from doqaoa.ising import (FrozenConfig, IsingHamiltonian, ParameterError, ResourceError, bitstring_to_spins,
                          brute_force_ground, classical_energy, energy_diagonal, enumerate_subproblems, freeze,
                          maxcut_hamiltonian, mean_bias_magnitude, spins_of_index, spins_to_bitstring,
                          stability_bound)


def random_hamiltonian(n, rng, density=0.6):
    J = {(i, j): rng.normal() for i, j in itertools.combinations(range(n), 2) if rng.random() < density}
    return IsingHamiltonian(n, J, tuple(rng.normal(size=n)), rng.normal())


def test_coupling_keys_are_canonical_and_summed():
    H = IsingHamiltonian(3, {(1, 0): 1.0, (0, 1): 0.5})
    assert H.couplings == {(0, 1): 1.5}


@pytest.mark.parametrize("kwargs", [dict(couplings={(0, 0): 1.0}), dict(couplings={(0, 3): 1.0}),
                                    dict(fields=(1.0,)), dict(fields=(np.inf, 0, 0))])
def test_invalid_hamiltonians(kwargs):
    with pytest.raises(ParameterError):
        IsingHamiltonian(3, **kwargs)


def test_json_round_trip():
    H = random_hamiltonian(5, np.random.default_rng(0))
    assert IsingHamiltonian.from_json(H.to_json()) == H


def test_spin_bit_convention():
    assert list(spins_of_index(3, 0b011)) == [1, -1, -1]
    assert spins_to_bitstring(bitstring_to_spins("0110")) == "0110"


def test_energy_diagonal_matches_classical_energy():
    rng = np.random.default_rng(1)
    H = random_hamiltonian(6, rng)
    diag = energy_diagonal(H)
    for k in range(64):
        assert diag[k] == pytest.approx(classical_energy(H, spins_of_index(6, k)), abs=1e-12)


def test_maxcut_triangle_ground():
    tri = Graph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))
    e, states = brute_force_ground(maxcut_hamiltonian(tri))
    # ZZ part of the cut cost: two cut edges and one uncut edge
    assert e == pytest.approx(-0.5)
    assert len(states) == 6


def test_brute_force_ties_sorted():
    H = IsingHamiltonian(2, {(0, 1): -1.0})
    e, states = brute_force_ground(H)
    assert e == -1.0 and states == ["00", "11"]


def test_brute_force_cap():
    with pytest.raises(ResourceError):
        brute_force_ground(IsingHamiltonian(30), cap=24)


def test_freeze_energy_consistency_exhaustive():
    rng = np.random.default_rng(2)
    H = random_hamiltonian(7, rng)
    nodes = (5, 1, 3)
    for sp in enumerate_subproblems(H, nodes):
        for k in range(1 << sp.hamiltonian.n):
            s_act = spins_of_index(sp.hamiltonian.n, k)
            full = np.zeros(7)
            full[list(sp.active_map)] = s_act
            full[list(sp.frozen.nodes)] = sp.frozen.values
            assert classical_energy(sp.hamiltonian, s_act) == pytest.approx(classical_energy(H, full), abs=1e-12)


def test_enumeration_order_is_lexicographic():
    H = IsingHamiltonian(4, {(0, 1): 1.0})
    subs = enumerate_subproblems(H, (2, 0))
    assert [sp.frozen.values for sp in subs] == [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    assert all(sp.active_map == (1, 3) for sp in subs)


def test_enumerate_cap():
    with pytest.raises(ResourceError):
        enumerate_subproblems(IsingHamiltonian(14), range(13))


def test_freeze_star_center():
    star = IsingHamiltonian(5, {(0, k): 1.0 for k in range(1, 5)})
    sp = freeze(star, FrozenConfig((0,), (1,)))
    assert sp.hamiltonian.fields == (1.0, 1.0, 1.0, 1.0)
    assert sp.hamiltonian.couplings == {}


def test_frozen_config_validation():
    with pytest.raises(ParameterError):
        FrozenConfig((0, 0), (1, 1))
    with pytest.raises(ParameterError):
        FrozenConfig((0,), (2,))
    cfg = FrozenConfig((3, 1), (1, -1))
    assert FrozenConfig.from_json(cfg.to_json()) == cfg


def test_mean_bias_and_stability_bound():
    H = IsingHamiltonian(3, {(0, 1): 1.0, (0, 2): -0.5})
    a, b = enumerate_subproblems(H, (0,))
    assert mean_bias_magnitude(a.hamiltonian) == pytest.approx(0.75)
    assert stability_bound(a, b) == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        mean_bias_magnitude(IsingHamiltonian(0))
