"""Dense state vectors and exact real-time evolution.

The propagator plays the role of an ideal time-evolution device: one dense
eigendecomposition of the Hamiltonian is cached, after which evolving any
state to any time is two matrix-vector products. Global phases are kept:
this package works with matrix elements, not expectation values, and the
phase of <phi|e^{-iHt}|phi> is the signal.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DenseLimitError, StateError
from .pauli import DENSE_QUBIT_LIMIT, PauliSumHamiltonian, to_dense

_NORM_TOL = 1e-10
_DRIFT_TOL = 1e-8


class StateVector:
    """Unit-norm vector of 2^N complex amplitudes (qubit 0 = least significant bit)."""

    __slots__ = ("amplitudes", "n_qubits")

    def __init__(self, amplitudes, n_qubits: int):
        amps = np.asarray(amplitudes, dtype=np.complex128)
        if amps.shape != (1 << n_qubits,):
            raise StateError(
                f"expected {1 << n_qubits} amplitudes for {n_qubits} qubits, got {amps.shape}"
            )
        norm = float(np.linalg.norm(amps))
        drift = abs(norm - 1.0)
        if drift > 1e-6:
            raise StateError(f"state norm {norm} is not 1 (deviation {drift:.3g})")
        if drift > _DRIFT_TOL:
            warnings.warn(f"state norm drifted to {norm}; renormalizing")
        self.amplitudes = amps / norm
        self.n_qubits = n_qubits

    def copy(self) -> "StateVector":
        # Bypass the constructor: the source already satisfies the norm
        # invariant and re-normalizing would perturb the last bits.
        out = object.__new__(StateVector)
        out.amplitudes = self.amplitudes.copy()
        out.n_qubits = self.n_qubits
        return out

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


def basis_state(n_qubits: int, bits: str) -> StateVector:
    """Computational basis state from its bitstring (rightmost character = qubit 0)."""
    if len(bits) != n_qubits:
        raise StateError(f"bitstring {bits!r} has {len(bits)} bits, expected {n_qubits}")
    if set(bits) - {"0", "1"}:
        raise StateError(f"bitstring {bits!r} contains non-binary characters")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps, n_qubits)


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b> with full phase."""
    if a.n_qubits != b.n_qubits:
        raise StateError("qubit count mismatch")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def superpose(a: StateVector, b: StateVector) -> StateVector:
    """(|a> + |b>)/sqrt(2) for orthogonal inputs.

    Orthogonality is required because the superposition stands in for a
    GHZ-style preparation across symmetry sectors; overlap signals that the
    two states share a sector and the preparation is ill-defined.
    """
    if a.n_qubits != b.n_qubits:
        raise StateError("qubit count mismatch")
    overlap = inner(a, b)
    if abs(overlap) > _NORM_TOL:
        raise StateError(f"superpose requires orthogonal states, got <a|b> = {overlap}")
    return StateVector((a.amplitudes + b.amplitudes) / np.sqrt(2.0), a.n_qubits)


@dataclass(frozen=True)
class SpectralPropagator:
    """Cached eigendecomposition of a Hamiltonian, giving exact e^{-iHt}."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    n_qubits: int
    fingerprint: str
    hamiltonian: PauliSumHamiltonian

    @classmethod
    def from_hamiltonian(
        cls, h: PauliSumHamiltonian, dense_limit: int = DENSE_QUBIT_LIMIT
    ) -> "SpectralPropagator":
        if h.n_qubits > dense_limit:
            raise DenseLimitError(
                f"{h.n_qubits} qubits exceeds the dense limit of {dense_limit}"
            )
        energies, vectors = np.linalg.eigh(to_dense(h, dense_limit))
        return cls(
            eigenvalues=energies,
            eigenvectors=vectors,
            n_qubits=h.n_qubits,
            fingerprint=h.fingerprint(),
            hamiltonian=h,
        )

    def evolve(self, state: StateVector, t: float) -> StateVector:
        """e^{-iHt}|state>, exact, norm- and phase-preserving."""
        if state.n_qubits != self.n_qubits:
            raise StateError("propagator and state qubit counts differ")
        if t == 0.0:
            return state.copy()
        coeffs = self.eigenvectors.conj().T @ state.amplitudes
        coeffs *= np.exp(-1j * self.eigenvalues * t)
        return StateVector(self.eigenvectors @ coeffs, self.n_qubits)

    def apply_hamiltonian(self, state: StateVector) -> np.ndarray:
        """H|state> as a raw (non-normalized) amplitude vector."""
        if state.n_qubits != self.n_qubits:
            raise StateError("propagator and state qubit counts differ")
        coeffs = self.eigenvectors.conj().T @ state.amplitudes
        return self.eigenvectors @ (self.eigenvalues * coeffs)

    def expectation(self, state: StateVector) -> float:
        """<state|H|state> (real for Hermitian H)."""
        return float(np.real(np.vdot(state.amplitudes, self.apply_hamiltonian(state))))


def evolve(prop: SpectralPropagator, state: StateVector, t: float) -> StateVector:
    """Functional alias for SpectralPropagator.evolve."""
    return prop.evolve(state, t)
