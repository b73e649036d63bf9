"""N-qubit Pauli-sum operators: parsing, dense matrices, symmetry checks.

Conventions used everywhere in this package:

* A Pauli string is written as N letters over {I, X, Y, Z}; the rightmost
  letter acts on qubit 0 (so ``"XZ"`` means X on qubit 1, Z on qubit 0).
* Basis-state indices put qubit 0 in the least significant bit.
* Coefficients are real (Hermitian operators only); complex coefficients
  are rejected at parse time.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import DenseLimitError, HamiltonianFormatError

PAULI_LETTERS = "IXYZ"
DENSE_QUBIT_LIMIT = 14

# Single-qubit products: _PRODUCT[a][b] = (phase, c) with a.b = phase * c.
_PRODUCT = {
    "I": {"I": (1, "I"), "X": (1, "X"), "Y": (1, "Y"), "Z": (1, "Z")},
    "X": {"I": (1, "X"), "X": (1, "I"), "Y": (1j, "Z"), "Z": (-1j, "Y")},
    "Y": {"I": (1, "Y"), "X": (-1j, "Z"), "Y": (1, "I"), "Z": (1j, "X")},
    "Z": {"I": (1, "Z"), "X": (1j, "Y"), "Y": (-1j, "X"), "Z": (1, "I")},
}


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, stored in text order."""

    axes: str

    def __post_init__(self):
        if not self.axes:
            raise ValueError("empty Pauli string")
        bad = set(self.axes) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)} in {self.axes!r}")

    def __len__(self) -> int:
        return len(self.axes)

    def __str__(self) -> str:
        return self.axes

    def axis_on(self, qubit: int) -> str:
        """Letter acting on the given qubit (rightmost letter = qubit 0)."""
        return self.axes[len(self.axes) - 1 - qubit]

    @property
    def is_diagonal(self) -> bool:
        """True when the string is built from I and Z only."""
        return set(self.axes) <= {"I", "Z"}

    def commutes_with(self, other: "PauliString") -> bool:
        """Two Pauli strings commute iff they anticommute on an even number of qubits."""
        if len(other) != len(self):
            raise ValueError("qubit count mismatch")
        clashes = sum(
            1
            for a, b in zip(self.axes, other.axes)
            if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0


def pauli_product(a: PauliString, b: PauliString) -> tuple[complex, PauliString]:
    """Product of two Pauli strings as (phase, string)."""
    if len(a) != len(b):
        raise ValueError("qubit count mismatch")
    phase: complex = 1
    letters = []
    for la, lb in zip(a.axes, b.axes):
        p, lc = _PRODUCT[la][lb]
        phase *= p
        letters.append(lc)
    return phase, PauliString("".join(letters))


@dataclass(frozen=True)
class PauliSumHamiltonian:
    """Weighted sum of Pauli strings, H = sum_i h_i P_i, canonicalized.

    Canonical form: duplicate strings merged by coefficient addition, exact
    zeros dropped, terms sorted by string. L is the number of surviving terms.
    """

    terms: tuple[tuple[float, PauliString], ...]
    n_qubits: int

    def __post_init__(self):
        for coeff, ps in self.terms:
            if len(ps) != self.n_qubits:
                raise ValueError(
                    f"term {ps} has {len(ps)} letters, expected {self.n_qubits}"
                )
            if not np.isfinite(coeff):
                raise ValueError(f"non-finite coefficient {coeff} on {ps}")

    @classmethod
    def from_terms(
        cls, terms, n_qubits: int | None = None
    ) -> "PauliSumHamiltonian":
        """Build from an iterable of (coefficient, axes-or-PauliString), canonicalizing."""
        merged: dict[str, float] = {}
        width = None
        for coeff, ps in terms:
            axes = ps.axes if isinstance(ps, PauliString) else str(ps)
            if width is None:
                width = len(axes)
            elif len(axes) != width:
                raise ValueError("inconsistent Pauli string lengths")
            merged[axes] = merged.get(axes, 0.0) + float(coeff)
        if width is None:
            if n_qubits is None:
                raise ValueError("empty Hamiltonian needs an explicit qubit count")
            width = n_qubits
        if n_qubits is not None and n_qubits != width:
            raise ValueError(f"terms have width {width}, expected {n_qubits}")
        kept = tuple(
            (c, PauliString(axes)) for axes, c in sorted(merged.items()) if c != 0.0
        )
        return cls(terms=kept, n_qubits=width)

    @property
    def L(self) -> int:
        return len(self.terms)

    def fingerprint(self) -> str:
        """Stable content hash, used to tie propagators to their source operator."""
        digest = hashlib.sha256()
        digest.update(str(self.n_qubits).encode())
        for coeff, ps in self.terms:
            digest.update(f"{coeff!r} {ps.axes};".encode())
        return digest.hexdigest()[:16]


# A symmetry operator is structurally identical to a Hamiltonian (real Pauli sum).
SymmetryOperator = PauliSumHamiltonian


def parse_hamiltonian(text: str) -> PauliSumHamiltonian:
    """Parse the line-oriented "<coefficient> <pauli-letters>" format.

    Blank lines are skipped; '#' starts a comment (full-line or trailing).
    """
    terms: list[tuple[float, str]] = []
    width = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise HamiltonianFormatError(
                f"expected '<coefficient> <pauli-letters>', got {raw.strip()!r}", lineno
            )
        coeff_text, axes = fields
        try:
            coeff = float(coeff_text)
        except ValueError:
            raise HamiltonianFormatError(
                f"bad coefficient {coeff_text!r} (complex values are not accepted)",
                lineno,
            ) from None
        if not np.isfinite(coeff):
            raise HamiltonianFormatError(f"non-finite coefficient {coeff_text}", lineno)
        axes = axes.upper()
        if set(axes) - set(PAULI_LETTERS):
            raise HamiltonianFormatError(f"invalid Pauli letters in {axes!r}", lineno)
        if width is None:
            width = len(axes)
        elif len(axes) != width:
            raise HamiltonianFormatError(
                f"string {axes!r} has {len(axes)} letters, previous lines had {width}",
                lineno,
            )
        terms.append((coeff, axes))
    if not terms:
        raise HamiltonianFormatError("no terms found")
    return PauliSumHamiltonian.from_terms(terms)


def serialize_hamiltonian(h: PauliSumHamiltonian) -> str:
    """Exact-round-trip text form (repr-precision coefficients)."""
    lines = [f"{coeff!r} {ps.axes}" for coeff, ps in h.terms]
    return "\n".join(lines) + "\n"


def _string_action(ps: PauliString) -> tuple[int, np.ndarray]:
    """Signed-permutation action of a Pauli string on basis indices.

    Returns (flip_mask, phases) with P|x> = phases[x] |x ^ flip_mask>.
    """
    n = len(ps)
    dim = 1 << n
    flip = 0
    phases = np.ones(dim, dtype=np.complex128)
    x = np.arange(dim)
    for qubit in range(n):
        axis = ps.axis_on(qubit)
        if axis == "I":
            continue
        bit = (x >> qubit) & 1
        if axis == "X":
            flip |= 1 << qubit
        elif axis == "Y":
            flip |= 1 << qubit
            phases *= 1j * (1 - 2 * bit)
        else:  # Z
            phases *= 1 - 2 * bit
    return flip, phases


def apply_pauli_string(ps: PauliString, amplitudes: np.ndarray) -> np.ndarray:
    """Apply a Pauli string to a 2^N amplitude vector (O(2^N))."""
    flip, phases = _string_action(ps)
    out = np.empty_like(amplitudes, dtype=np.complex128)
    out[np.arange(len(amplitudes)) ^ flip] = phases * amplitudes
    return out


def apply_hamiltonian(h: PauliSumHamiltonian, amplitudes: np.ndarray) -> np.ndarray:
    """H @ amplitudes without materializing the dense matrix."""
    out = np.zeros_like(amplitudes, dtype=np.complex128)
    idx = np.arange(len(amplitudes))
    for coeff, ps in h.terms:
        flip, phases = _string_action(ps)
        out[idx ^ flip] += coeff * phases * amplitudes
    return out


def to_dense(h: PauliSumHamiltonian, dense_limit: int = DENSE_QUBIT_LIMIT) -> np.ndarray:
    """Dense 2^N x 2^N Hermitian matrix of the operator."""
    if h.n_qubits > dense_limit:
        raise DenseLimitError(
            f"{h.n_qubits} qubits exceeds the dense limit of {dense_limit}"
        )
    dim = 1 << h.n_qubits
    mat = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for coeff, ps in h.terms:
        flip, phases = _string_action(ps)
        mat[cols ^ flip, cols] += coeff * phases
    return mat


def vacuum_expectation(h: PauliSumHamiltonian) -> float:
    """<0...0|H|0...0>: sum of coefficients of the I/Z-only strings."""
    return float(sum(coeff for coeff, ps in h.terms if ps.is_diagonal))


def commutator(
    a: PauliSumHamiltonian, b: PauliSumHamiltonian
) -> dict[str, complex]:
    """[A, B] as a Pauli sum, {axes: coefficient}, with exact cancellation."""
    if a.n_qubits != b.n_qubits:
        raise ValueError("qubit count mismatch")
    acc: dict[str, complex] = {}
    for ca, pa in a.terms:
        for cb, pb in b.terms:
            if pa.commutes_with(pb):
                continue
            # For anticommuting strings [A,B] = 2AB.
            phase, pc = pauli_product(pa, pb)
            acc[pc.axes] = acc.get(pc.axes, 0.0) + 2 * ca * cb * phase
    return {axes: c for axes, c in acc.items() if c != 0}


def commutes(
    h: PauliSumHamiltonian, s: SymmetryOperator, tol: float = 1e-10
) -> bool:
    """True iff [H, S] vanishes (term-algebra commutator norm below tol)."""
    rest = commutator(h, s)
    return all(abs(c) < tol for c in rest.values())


def total_z(n_qubits: int) -> SymmetryOperator:
    """Total-Z symmetry operator, sum of single-qubit Z terms."""
    terms = []
    for qubit in range(n_qubits):
        axes = ["I"] * n_qubits
        axes[n_qubits - 1 - qubit] = "Z"
        terms.append((1.0, "".join(axes)))
    return PauliSumHamiltonian.from_terms(terms)


def particle_number(n_qubits: int) -> SymmetryOperator:
    """Occupation-number operator, sum_i (I - Z_i)/2, in Pauli form."""
    terms: list[tuple[float, str]] = [(n_qubits / 2.0, "I" * n_qubits)]
    for qubit in range(n_qubits):
        axes = ["I"] * n_qubits
        axes[n_qubits - 1 - qubit] = "Z"
        terms.append((-0.5, "".join(axes)))
    return PauliSumHamiltonian.from_terms(terms)
