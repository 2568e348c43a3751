import itertools

import numpy as np
import pytest

from doqaoa.exact import P1Kernel, expectation_p1_exact, p1_landscape, p1_moments
from doqaoa.ising import IsingHamiltonian
from doqaoa.qaoa import QaoaParams, expectation, prepare_state


def random_hamiltonian(n, rng, density=0.5):
    J = {(i, j): rng.normal() for i, j in itertools.combinations(range(n), 2) if rng.random() < density}
    return IsingHamiltonian(n, J, tuple(rng.normal(size=n)), rng.normal())


@pytest.mark.parametrize("seed", range(20))
def test_closed_form_matches_statevector(seed):
    rng = np.random.default_rng(seed)
    H = random_hamiltonian(int(rng.integers(1, 10)), rng, rng.uniform(0.2, 1.0))
    g, b = rng.uniform(-np.pi, np.pi, 2)
    sv = expectation(prepare_state(H, QaoaParams((g,), (b,))), H)
    assert expectation_p1_exact(H, g, b) == pytest.approx(sv, abs=1e-9)


def test_zero_angles_give_constant():
    H = random_hamiltonian(6, np.random.default_rng(1))
    for b in (0.3, -1.1):
        assert expectation_p1_exact(H, 0.0, b) == pytest.approx(H.constant, abs=1e-12)
    for g in (0.3, -1.1):
        assert expectation_p1_exact(H, g, 0.0) == pytest.approx(H.constant, abs=1e-12)


def test_landscape_grid_matches_pointwise():
    H = random_hamiltonian(5, np.random.default_rng(2))
    gam, bet = np.linspace(-1, 1, 4), np.linspace(-0.5, 0.5, 3)
    grid = p1_landscape(H, gam, bet)
    for a, g in enumerate(gam):
        for c, b in enumerate(bet):
            assert grid[a, c] == pytest.approx(expectation_p1_exact(H, g, b), abs=1e-12)


def test_kernel_reuse_across_field_vectors():
    rng = np.random.default_rng(3)
    H = random_hamiltonian(7, rng)
    gam, bet = np.linspace(-2, 2, 5), np.linspace(-1, 1, 5)
    kern = P1Kernel.from_hamiltonian(H, gam)
    for _ in range(3):
        h = rng.normal(size=7)
        assert np.allclose(kern.landscape(h, bet, 0.0), p1_landscape(H.with_fields(h, 0.0), gam, bet), atol=1e-12)


def test_light_cone():
    # a path 0-1-2-3-4-5: <Z_0 Z_1> at p=1 only sees couplings touching {0, 1, 2}
    J = {(k, k + 1): 1.0 for k in range(5)}
    base = IsingHamiltonian(6, J, (0.3,) * 6)

    def zz01(H):
        sub = IsingHamiltonian(H.n, {(0, 1): 1.0}, (0.0,) * H.n)
        psi = prepare_state(H, QaoaParams((0.7,), (0.4,)))
        return expectation(psi, sub)

    far = IsingHamiltonian(6, J | {(4, 5): 2.5}, (0.3,) * 6)
    near = IsingHamiltonian(6, J | {(1, 2): 2.5}, (0.3,) * 6)
    assert zz01(far) == pytest.approx(zz01(base), abs=1e-12)
    assert zz01(near) != pytest.approx(zz01(base), abs=1e-6)


def test_moments_split():
    H = random_hamiltonian(4, np.random.default_rng(5))
    z, zz = p1_moments(H, 0.4, 0.2)
    assert H.constant + z + zz == pytest.approx(expectation_p1_exact(H, 0.4, 0.2))


def test_large_sparse_instance_runs():
    n = 400
    J = {(k, k + 1): 1.0 for k in range(n - 1)}
    H = IsingHamiltonian(n, J)
    grid = p1_landscape(H, np.linspace(-np.pi, np.pi, 8, endpoint=False), np.linspace(-1, 1, 4))
    assert grid.shape == (8, 4) and np.all(np.isfinite(grid))


def test_no_edges_no_fields():
    H = IsingHamiltonian(3, {}, None, 2.0)
    assert expectation_p1_exact(H, 0.5, 0.5) == pytest.approx(2.0)
