import numpy as np
import pytest

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def kron_dense(h):
    """Independent dense builder: plain Kronecker products, no index tricks.

    Letters are in text order, leftmost = highest qubit, so the plain kron
    chain puts qubit 0 in the least significant position.
    """
    dim = 1 << h.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for coeff, ps in h.terms:
        term = np.array([[1.0]], dtype=complex)
        for letter in ps.axes:
            term = np.kron(term, PAULI_MATRICES[letter])
        out += coeff * term
    return out


def random_state(n_qubits, rng):
    amps = rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits)
    return amps / np.linalg.norm(amps)


def random_hamiltonian(n_qubits, n_terms, rng):
    from krylovlab.pauli import PauliSumHamiltonian

    terms = []
    for _ in range(n_terms):
        axes = "".join(rng.choice(list("IXYZ")) for _ in range(n_qubits))
        terms.append((float(rng.normal()), axes))
    return PauliSumHamiltonian.from_terms(terms, n_qubits=n_qubits)


def random_conserving_hamiltonian(n_qubits, rng):
    """Random particle-number-conserving Pauli sum: hopping pairs
    (XX+YY with a shared coefficient), ZZ couplings, and Z fields."""
    from krylovlab.pauli import PauliSumHamiltonian

    def site(qubit, letter, partner=None, partner_letter=None):
        axes = ["I"] * n_qubits
        axes[n_qubits - 1 - qubit] = letter
        if partner is not None:
            axes[n_qubits - 1 - partner] = partner_letter
        return "".join(axes)

    terms = []
    for i in range(n_qubits):
        terms.append((float(rng.normal()), site(i, "Z")))
        for j in range(i + 1, n_qubits):
            hop = float(rng.normal())
            terms.append((hop, site(i, "X", j, "X")))
            terms.append((hop, site(i, "Y", j, "Y")))
            terms.append((float(rng.normal()) * 0.5, site(i, "Z", j, "Z")))
    return PauliSumHamiltonian.from_terms(terms, n_qubits=n_qubits)


def random_sector_state(n_qubits, weight, rng):
    """Random normalized state supported on one Hamming-weight sector."""
    from krylovlab.states import StateVector

    dim = 1 << n_qubits
    amps = np.zeros(dim, dtype=complex)
    idx = [k for k in range(dim) if bin(k).count("1") == weight]
    amps[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    amps /= np.linalg.norm(amps)
    return StateVector(amps, n_qubits)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
