import itertools
import math

import numpy as np
import pytest

from doqaoa.graphs import Graph, GraphEnsembleSpec, generate
from doqaoa.ising import IsingHamiltonian, ParameterError, ResourceError, classical_energy, energy_diagonal, \
    graph_hamiltonian, maxcut_hamiltonian, spins_of_index
from doqaoa.qaoa import (NOISELESS, NoiseSpec, QaoaParams, ShotLedger, circuit_cost, counts_from_json,
                         counts_to_json, energy_from_counts, expectation, noisy_expectation, output_probabilities,
                         prepare_state, sample, split_moments)

TRIANGLE = Graph(3, ((0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)))


def random_hamiltonian(n, rng):
    J = {(i, j): rng.normal() for i, j in itertools.combinations(range(n), 2) if rng.random() < 0.5}
    return IsingHamiltonian(n, J, tuple(rng.normal(size=n)), rng.normal())


def test_params_validation():
    with pytest.raises(ParameterError):
        QaoaParams((0.1, 0.2), (0.3,))
    with pytest.raises(ParameterError):
        QaoaParams((), ())
    with pytest.raises(ParameterError):
        QaoaParams((math.nan,), (0.0,))
    p = QaoaParams((0.1, 0.2), (0.3, 0.4))
    assert QaoaParams.from_vector(p.to_vector()) == p and p.p == 2


def test_zero_angles_give_uniform_state():
    H = random_hamiltonian(4, np.random.default_rng(0))
    psi = prepare_state(H, QaoaParams((0.0,), (0.0,)))
    assert np.allclose(psi, 0.25)


def test_single_qubit_full_polarization():
    H = IsingHamiltonian(1, {}, (1.0,))
    psi = prepare_state(H, QaoaParams((math.pi / 4,), (math.pi / 4,)))
    z = abs(psi[0]) ** 2 - abs(psi[1]) ** 2
    assert abs(z) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_norm_preserved(p):
    rng = np.random.default_rng(p)
    H = random_hamiltonian(6, rng)
    psi = prepare_state(H, QaoaParams(tuple(rng.uniform(-3, 3, p)), tuple(rng.uniform(-3, 3, p))))
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)


def test_statevector_cap():
    with pytest.raises(ResourceError):
        prepare_state(IsingHamiltonian(21), QaoaParams((0.1,), (0.1,)))


def test_expectation_of_uniform_state_is_constant():
    H = random_hamiltonian(5, np.random.default_rng(3))
    psi = np.full(32, 32 ** -0.5, dtype=complex)
    assert expectation(psi, H) == pytest.approx(H.constant, abs=1e-12)


def test_expectation_of_basis_state():
    H = random_hamiltonian(4, np.random.default_rng(4))
    psi = np.zeros(16, dtype=complex)
    psi[9] = 1.0
    assert expectation(psi, H) == pytest.approx(classical_energy(H, spins_of_index(4, 9)))
    with pytest.raises(ParameterError):
        expectation(np.ones(8), H)


def test_triangle_p1_optimum_is_negative():
    H = maxcut_hamiltonian(TRIANGLE)
    grid = np.linspace(-math.pi, math.pi, 32, endpoint=False)
    best = min(expectation(prepare_state(H, QaoaParams((g,), (b,))), H) for g in grid for b in grid / 2)
    assert best < 0


def test_split_moments_sum_to_expectation():
    rng = np.random.default_rng(5)
    H = random_hamiltonian(5, rng)
    psi = prepare_state(H, QaoaParams((0.4, -0.2), (0.3, 0.9)))
    z, zz = split_moments(psi, H)
    assert H.constant + z + zz == pytest.approx(expectation(psi, H), abs=1e-12)


def test_noisy_expectation_matches_noisy_distribution():
    rng = np.random.default_rng(6)
    H = random_hamiltonian(4, rng)
    psi = prepare_state(H, QaoaParams((0.7,), (-0.4,)))
    noise = NoiseSpec(0.02, 0.1)
    cnots = circuit_cost(H, 1)[0]
    probs = output_probabilities(psi, noise, cnots)
    # apply independent readout flips to the distribution by brute force
    flipped = np.zeros_like(probs)
    for k in range(16):
        for mask in range(16):
            nflip = bin(mask).count("1")
            flipped[k ^ mask] += probs[k] * noise.readout_flip ** nflip * (1 - noise.readout_flip) ** (4 - nflip)
    direct = float(flipped @ energy_diagonal(H))
    assert noisy_expectation(H, *split_moments(psi, H), noise, cnots) == pytest.approx(direct, abs=1e-12)


def test_sample_counts_sum_and_determinism():
    H = random_hamiltonian(5, np.random.default_rng(7))
    psi = prepare_state(H, QaoaParams((0.3,), (0.2,)))
    a = sample(psi, 8192, seed=11)
    assert sum(a.values()) == 8192
    assert a == sample(psi, 8192, seed=11)
    assert all(len(k) == 5 for k in a)
    assert sample(psi, 0, seed=1) == {}


def test_readout_flip_one_inverts_every_bit():
    psi = np.zeros(8, dtype=complex)
    psi[0b001] = 1.0
    assert sample(psi, 100, NoiseSpec(readout_flip=1.0), seed=0) == {"110": 100}


def test_uniform_sampling_within_three_sigma():
    psi = np.full(4, 0.5, dtype=complex)
    counts = sample(psi, 10_000, seed=3)
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    assert set(counts) == {"00", "01", "10", "11"}
    assert all(abs(c - 2500) <= 3 * sigma for c in counts.values())


def test_full_depolarizing_is_uniform():
    psi = np.zeros(4, dtype=complex)
    psi[0] = 1.0
    assert np.allclose(output_probabilities(psi, NoiseSpec(depolarizing2q=1.0), cnots=1), 0.25)
    assert NoiseSpec(0.01).depolarizing_weight(0) == 0.0
    with pytest.raises(ParameterError):
        NoiseSpec(1.5)


def test_energy_from_counts():
    H = random_hamiltonian(3, np.random.default_rng(8))
    assert energy_from_counts({"101": 5}, H) == pytest.approx(classical_energy(H, [-1, 1, -1]))
    uniform = {format(k, "03b"): 10 for k in range(8)}
    assert energy_from_counts(uniform, H) == pytest.approx(H.constant)
    with pytest.raises(ParameterError):
        energy_from_counts({}, H)


def test_sampling_converges_to_expectation():
    rng = np.random.default_rng(9)
    H = random_hamiltonian(6, rng)
    psi = prepare_state(H, QaoaParams((0.5,), (0.6,)))
    exact = expectation(psi, H)
    shots = 1_000_000
    est = energy_from_counts(sample(psi, shots, seed=5), H)
    diag = energy_diagonal(H)
    probs = np.abs(psi) ** 2
    std_err = math.sqrt(float(probs @ (diag - exact) ** 2) / shots)
    assert abs(est - exact) <= 5 * std_err


def test_circuit_cost():
    assert circuit_cost(maxcut_hamiltonian(TRIANGLE), 1) == (6, 3)
    reg = graph_hamiltonian(generate(GraphEnsembleSpec("regular", 10, seed=0, d=3)))
    assert circuit_cost(reg, 2)[1] == 8
    assert circuit_cost(IsingHamiltonian(4), 3)[0] == 0
    with pytest.raises(ParameterError):
        circuit_cost(reg, 0)


def test_ledger():
    led = ShotLedger()
    led.charge("training", 8192)
    led.charge("evaluation", 100, evals=2)
    other = ShotLedger()
    other.charge("fine_tune", 50)
    led.merge(other)
    assert led.total_shots == 8342 and led.total_evals == 4
    with pytest.raises(ParameterError):
        led.charge("warmup", 1)
    with pytest.raises(ParameterError):
        led.charge("training", -1)


def test_counts_json_round_trip():
    c = {"01": 3, "10": 5}
    assert counts_from_json(counts_to_json(c)) == c


def test_noiseless_constant():
    assert NOISELESS.is_noiseless
