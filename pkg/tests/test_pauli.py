import numpy as np
import pytest

from krylovlab.errors import DenseLimitError, HamiltonianFormatError
from krylovlab.pauli import (
    PauliString,
    PauliSumHamiltonian,
    apply_hamiltonian,
    apply_pauli_string,
    commutes,
    parse_hamiltonian,
    particle_number,
    pauli_product,
    serialize_hamiltonian,
    to_dense,
    total_z,
    vacuum_expectation,
)

from conftest import kron_dense, random_hamiltonian


class TestParse:
    def test_single_term(self):
        h = parse_hamiltonian("1.0 Z")
        assert h.n_qubits == 1
        assert h.L == 1
        assert h.terms[0] == (1.0, PauliString("Z"))

    def test_duplicates_merge(self):
        h = parse_hamiltonian("0.5 XZ\n0.5 XZ")
        assert h.L == 1
        assert h.terms[0][0] == pytest.approx(1.0)

    def test_counts(self):
        h = parse_hamiltonian("0.3 ZZ\n0.2 XX\n0.1 IZ")
        assert h.L == 3
        assert h.n_qubits == 2

    def test_comments_and_blank_lines(self):
        h = parse_hamiltonian("# header\n\n1.0 Z  # trailing\n")
        assert h.L == 1

    def test_malformed_line_reports_number(self):
        with pytest.raises(HamiltonianFormatError, match="line 2"):
            parse_hamiltonian("1.0 Z\nnot a line at all\n")

    def test_inconsistent_lengths(self):
        with pytest.raises(HamiltonianFormatError, match="letters"):
            parse_hamiltonian("1.0 Z\n1.0 ZZ")

    def test_complex_coefficient_rejected(self):
        with pytest.raises(HamiltonianFormatError):
            parse_hamiltonian("1.0+2.0j Z")

    def test_non_finite_rejected(self):
        with pytest.raises(HamiltonianFormatError, match="non-finite"):
            parse_hamiltonian("inf Z")

    def test_bad_letters(self):
        with pytest.raises(HamiltonianFormatError):
            parse_hamiltonian("1.0 QZ")

    def test_empty(self):
        with pytest.raises(HamiltonianFormatError):
            parse_hamiltonian("# nothing here\n")

    def test_round_trip_identity(self, rng):
        for _ in range(10):
            h = random_hamiltonian(3, 6, rng)
            again = parse_hamiltonian(serialize_hamiltonian(h))
            assert again.terms == h.terms


class TestDense:
    def test_z(self):
        assert np.allclose(to_dense(parse_hamiltonian("1.0 Z")), np.diag([1, -1]))

    def test_x(self):
        assert np.allclose(to_dense(parse_hamiltonian("1.0 X")), [[0, 1], [1, 0]])

    def test_rightmost_letter_is_qubit_zero(self):
        # "XZ" = X on qubit 1, Z on qubit 0: must equal kron(X, Z).
        h = parse_hamiltonian("1.0 XZ")
        expected = np.kron([[0, 1], [1, 0]], np.diag([1, -1]))
        assert np.allclose(to_dense(h), expected)

    def test_matches_kron_oracle_eigenvalues(self):
        h = parse_hamiltonian("0.3 ZZ\n0.2 XX\n0.1 IZ")
        ours = np.linalg.eigvalsh(to_dense(h))
        reference = np.linalg.eigvalsh(kron_dense(h))
        assert np.max(np.abs(ours - reference)) < 1e-12

    def test_random_matches_kron_oracle(self, rng):
        for _ in range(5):
            h = random_hamiltonian(4, 8, rng)
            assert np.max(np.abs(to_dense(h) - kron_dense(h))) < 1e-12

    def test_hermitian(self, rng):
        for _ in range(5):
            dense = to_dense(random_hamiltonian(4, 10, rng))
            assert np.max(np.abs(dense - dense.conj().T)) < 1e-14

    def test_dense_limit(self):
        h = parse_hamiltonian("1.0 " + "Z" * 15)
        with pytest.raises(DenseLimitError):
            to_dense(h)

    def test_apply_matches_dense(self, rng):
        h = random_hamiltonian(4, 8, rng)
        vec = rng.normal(size=16) + 1j * rng.normal(size=16)
        assert np.allclose(apply_hamiltonian(h, vec), to_dense(h) @ vec)

    def test_apply_string_matches_dense(self, rng):
        ps = PauliString("XYZI")
        single = PauliSumHamiltonian.from_terms([(1.0, ps)])
        vec = rng.normal(size=16) + 1j * rng.normal(size=16)
        assert np.allclose(apply_pauli_string(ps, vec), kron_dense(single) @ vec)


class TestVacuum:
    def test_z(self):
        assert vacuum_expectation(parse_hamiltonian("1.0 Z")) == 1.0

    def test_only_diagonal_strings_count(self):
        h = parse_hamiltonian("0.3 ZZ\n0.2 XX\n0.1 IZ")
        assert vacuum_expectation(h) == pytest.approx(0.4)

    def test_random_matches_dense_element(self, rng):
        for _ in range(5):
            h = random_hamiltonian(6, 12, rng)
            dense = to_dense(h)
            assert abs(vacuum_expectation(h) - dense[0, 0].real) < 1e-14
            assert abs(dense[0, 0].imag) < 1e-14

    def test_equals_first_diagonal_element(self, rng):
        h = random_hamiltonian(3, 9, rng)
        assert abs(vacuum_expectation(h) - to_dense(h)[0, 0].real) < 1e-12


class TestPauliAlgebra:
    def test_product_table(self):
        phase, ps = pauli_product(PauliString("X"), PauliString("Y"))
        assert phase == 1j and ps.axes == "Z"
        phase, ps = pauli_product(PauliString("Y"), PauliString("X"))
        assert phase == -1j and ps.axes == "Z"

    def test_product_matches_dense(self, rng):
        for _ in range(10):
            a = PauliString("".join(rng.choice(list("IXYZ")) for _ in range(3)))
            b = PauliString("".join(rng.choice(list("IXYZ")) for _ in range(3)))
            phase, c = pauli_product(a, b)
            da = kron_dense(PauliSumHamiltonian.from_terms([(1.0, a)]))
            db = kron_dense(PauliSumHamiltonian.from_terms([(1.0, b)]))
            dc = kron_dense(PauliSumHamiltonian.from_terms([(1.0, c)]))
            assert np.max(np.abs(da @ db - phase * dc)) < 1e-12


class TestCommutes:
    def test_diagonal_pair(self):
        h = parse_hamiltonian("1.0 ZI\n1.0 IZ\n0.5 ZZ")
        assert commutes(h, particle_number(2))

    def test_anticommuting_paulis(self):
        assert not commutes(parse_hamiltonian("1.0 X"), parse_hamiltonian("1.0 Z"))

    def test_molecular_style_matches_dense_commutator(self, rng):
        from conftest import random_conserving_hamiltonian

        h = random_conserving_hamiltonian(4, rng)
        s = particle_number(4)
        dense_comm = to_dense(h) @ to_dense(s) - to_dense(s) @ to_dense(h)
        assert np.max(np.abs(dense_comm)) < 1e-10
        assert commutes(h, s)

    def test_sum_level_cancellation(self):
        # Individual terms fail to commute with total Z; the sum does.
        from krylovlab.models import heisenberg_xxz

        h = heisenberg_xxz(3, 0.7)
        assert commutes(h, total_z(3))
        assert not commutes(parse_hamiltonian("1.0 IXX"), total_z(3))

    def test_random_agreement_with_dense(self, rng):
        for _ in range(10):
            a = random_hamiltonian(3, 4, rng)
            b = random_hamiltonian(3, 4, rng)
            dense_comm = to_dense(a) @ to_dense(b) - to_dense(b) @ to_dense(a)
            assert commutes(a, b) == (np.max(np.abs(dense_comm)) < 1e-10)


class TestSymmetryOperators:
    def test_particle_number_spectrum(self):
        dense = to_dense(particle_number(3))
        counts = sorted(np.linalg.eigvalsh(dense))
        expected = sorted(bin(k).count("1") for k in range(8))
        assert np.allclose(counts, expected)

    def test_total_z_diagonal(self):
        dense = to_dense(total_z(2))
        assert np.allclose(np.diag(dense), [2, 0, 0, -2])
