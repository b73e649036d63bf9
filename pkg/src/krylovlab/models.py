"""Built-in desk-scale Hamiltonians and reference/ansatz state constructors."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import StateError
from .pauli import PauliSumHamiltonian, parse_hamiltonian
from .states import StateVector, basis_state


def _single_site(n_qubits: int, qubit: int, letter: str) -> str:
    axes = ["I"] * n_qubits
    axes[n_qubits - 1 - qubit] = letter
    return "".join(axes)


def _bond(n_qubits: int, qubit: int, letter: str) -> str:
    axes = ["I"] * n_qubits
    axes[n_qubits - 1 - qubit] = letter
    axes[n_qubits - 2 - qubit] = letter
    return "".join(axes)


def tfim(n_qubits: int, coupling: float, field: float) -> PauliSumHamiltonian:
    """Transverse-field Ising chain, open boundary:
    H = -coupling * sum Z_i Z_{i+1}  -  field * sum X_i.
    """
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    terms: list[tuple[float, str]] = []
    for i in range(n_qubits - 1):
        terms.append((-coupling, _bond(n_qubits, i, "Z")))
    for i in range(n_qubits):
        terms.append((-field, _single_site(n_qubits, i, "X")))
    return PauliSumHamiltonian.from_terms(terms, n_qubits=n_qubits)


def heisenberg_xxz(n_qubits: int, delta: float) -> PauliSumHamiltonian:
    """XXZ chain, open boundary:
    H = sum (X_i X_{i+1} + Y_i Y_{i+1} + delta * Z_i Z_{i+1}).

    Conserves total Z, so it pairs with the multi-fidelity symmetry requirement.
    """
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    terms: list[tuple[float, str]] = []
    for i in range(n_qubits - 1):
        terms.append((1.0, _bond(n_qubits, i, "X")))
        terms.append((1.0, _bond(n_qubits, i, "Y")))
        terms.append((delta, _bond(n_qubits, i, "Z")))
    return PauliSumHamiltonian.from_terms(terms, n_qubits=n_qubits)


def plus_state(n_qubits: int) -> StateVector:
    """Uniform superposition |+>^N: the transverse-polarized product state,
    exact ground state of a pure -X field and the natural reference for
    transverse-field chains."""
    dim = 1 << n_qubits
    return StateVector(np.full(dim, 1.0 / np.sqrt(dim)), n_qubits)


def hartree_fock_state(n_qubits: int, occupied: int) -> StateVector:
    """Product state |0>^(N-eta) x |1>^eta: the eta lowest-index qubits set to 1."""
    if not 0 <= occupied <= n_qubits:
        raise StateError(f"occupation {occupied} outside [0, {n_qubits}]")
    return basis_state(n_qubits, "0" * (n_qubits - occupied) + "1" * occupied)


def singlet_ansatz(n_qubits: int, pattern_a: str, pattern_b: str) -> StateVector:
    """Two-determinant state (|a> - |b>)/sqrt(2) from equal-weight bit patterns."""
    if len(pattern_a) != n_qubits or len(pattern_b) != n_qubits:
        raise StateError("patterns must have one bit per qubit")
    if pattern_a == pattern_b:
        raise StateError("patterns must differ")
    if pattern_a.count("1") != pattern_b.count("1"):
        raise StateError(
            "patterns must have equal particle number to stay in one symmetry sector"
        )
    a = basis_state(n_qubits, pattern_a)
    b = basis_state(n_qubits, pattern_b)
    return StateVector((a.amplitudes - b.amplitudes) / np.sqrt(2.0), n_qubits)


MODEL_FAMILIES = ("tfim", "heisenberg_xxz", "file")


@dataclass(frozen=True)
class ModelSpec:
    """Declarative Hamiltonian choice, resolvable to a PauliSumHamiltonian."""

    family: str
    n_qubits: int = 0
    coupling: float = 1.0
    field: float = 1.0
    delta: float = 1.0
    text: str = ""

    def build(self) -> PauliSumHamiltonian:
        if self.family == "tfim":
            return tfim(self.n_qubits, self.coupling, self.field)
        if self.family == "heisenberg_xxz":
            return heisenberg_xxz(self.n_qubits, self.delta)
        if self.family == "file":
            if not self.text:
                raise ValueError("file-family model needs the file contents in 'text'")
            return parse_hamiltonian(self.text)
        raise ValueError(f"unknown model family {self.family!r}")

    @classmethod
    def from_file(cls, path: str | Path) -> "ModelSpec":
        text = Path(path).read_text()
        return cls(family="file", text=text)
