"""Brute-force ground truth: dense spectra and direct matrix elements.

This is deliberately part of the shipped package, not test scaffolding:
convergence traces report the energy error against the exact spectrum, so
the reference diagonalization has to be available at run time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DenseLimitError
from .pauli import DENSE_QUBIT_LIMIT, PauliSumHamiltonian, to_dense
from .states import StateVector


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition, eigenvalues ascending, eigenvectors as columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def eigenstate(self, k: int) -> StateVector:
        n_qubits = int(np.log2(self.eigenvectors.shape[0]))
        return StateVector(self.eigenvectors[:, k], n_qubits)


def diagonalize(
    h: PauliSumHamiltonian, dense_limit: int = DENSE_QUBIT_LIMIT
) -> Spectrum:
    """Dense full spectrum of the Hamiltonian."""
    if h.n_qubits > dense_limit:
        raise DenseLimitError(
            f"{h.n_qubits} qubits exceeds the dense limit of {dense_limit}"
        )
    eigenvalues, eigenvectors = np.linalg.eigh(to_dense(h, dense_limit))
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def direct_element(
    h: PauliSumHamiltonian,
    phi_i: StateVector,
    phi_j: StateVector,
    n: int,
    tau: float,
    dense_limit: int = DENSE_QUBIT_LIMIT,
) -> complex:
    """Exact <phi_i| e^{-i n H tau} |phi_j> through the dense spectrum."""
    spec = diagonalize(h, dense_limit)
    left = spec.eigenvectors.conj().T @ phi_i.amplitudes
    right = spec.eigenvectors.conj().T @ phi_j.amplitudes
    phases = np.exp(-1j * spec.eigenvalues * n * tau)
    return complex(np.sum(np.conj(left) * phases * right))


def nearest_eigenvalue(spec: Spectrum, energy: float) -> tuple[int, float]:
    """(index, eigenvalue) of the spectrum entry closest to the given energy."""
    k = int(np.argmin(np.abs(spec.eigenvalues - energy)))
    return k, float(spec.eigenvalues[k])
