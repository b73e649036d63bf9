import numpy as np
import pytest
import scipy.linalg

from krylovlab.errors import DenseLimitError
from krylovlab.models import heisenberg_xxz
from krylovlab.oracle import diagonalize, direct_element, nearest_eigenvalue
from krylovlab.pauli import apply_hamiltonian, parse_hamiltonian, to_dense
from krylovlab.states import StateVector

from conftest import random_hamiltonian, random_state


def power_iteration_ground_energy(h, iterations=4000, seed=1):
    """Independent route to the ground energy: shifted power iteration using
    only Hamiltonian applications (no eigendecomposition)."""
    rng = np.random.default_rng(seed)
    shift = sum(abs(c) for c, _ in h.terms) + 1.0
    vec = rng.normal(size=1 << h.n_qubits) + 1j * rng.normal(size=1 << h.n_qubits)
    vec /= np.linalg.norm(vec)
    for _ in range(iterations):
        vec = shift * vec - apply_hamiltonian(h, vec)
        vec /= np.linalg.norm(vec)
    return float(np.real(np.vdot(vec, apply_hamiltonian(h, vec))))


class TestDiagonalize:
    def test_single_qubit(self):
        assert np.allclose(diagonalize(parse_hamiltonian("1.0 Z")).eigenvalues, [-1, 1])

    def test_two_qubit_diagonal_model(self):
        h = parse_hamiltonian("1.0 ZI\n1.0 IZ\n0.5 ZZ")
        assert np.allclose(diagonalize(h).eigenvalues, [-1.5, -0.5, -0.5, 2.5])

    def test_residuals(self, rng):
        h = random_hamiltonian(4, 8, rng)
        spec = diagonalize(h)
        dense = to_dense(h)
        for k in (0, 7, 15):
            residual = dense @ spec.eigenvectors[:, k] - spec.eigenvalues[k] * spec.eigenvectors[:, k]
            assert np.linalg.norm(residual) < 1e-9

    def test_ten_qubit_chain_against_power_iteration(self):
        h = heisenberg_xxz(10, 1.0)
        reference = power_iteration_ground_energy(h)
        assert abs(diagonalize(h).ground_energy - reference) < 1e-8

    def test_size_limit(self):
        h = parse_hamiltonian("1.0 " + "Z" * 15)
        with pytest.raises(DenseLimitError):
            diagonalize(h)


class TestDirectElement:
    def test_matches_analytic(self):
        h = parse_hamiltonian("1.0 Z")
        plus = StateVector(np.array([1, 1]) / np.sqrt(2), 1)
        assert direct_element(h, plus, plus, 1, 0.5) == pytest.approx(np.cos(0.5), abs=1e-12)
        assert direct_element(h, plus, plus, 2, 0.5) == pytest.approx(np.cos(1.0), abs=1e-12)

    def test_cross_checked_with_expm(self, rng):
        for _ in range(3):
            h = random_hamiltonian(6, 10, rng)
            phi_i = StateVector(random_state(6, rng), 6)
            phi_j = StateVector(random_state(6, rng), 6)
            n, tau = 3, 0.4
            ours = direct_element(h, phi_i, phi_j, n, tau)
            propagator = scipy.linalg.expm(-1j * to_dense(h) * n * tau)
            reference = np.vdot(phi_i.amplitudes, propagator @ phi_j.amplitudes)
            assert abs(ours - reference) < 1e-10


class TestNearestEigenvalue:
    def test_assignment(self):
        spec = diagonalize(parse_hamiltonian("1.0 ZI\n1.0 IZ\n0.5 ZZ"))
        level, energy = nearest_eigenvalue(spec, -0.4)
        assert energy == pytest.approx(-0.5)
        assert level in (1, 2)
