"""Assembly of the four (F, S) matrix pencils and the filter-basis transform.

Two non-orthogonal bases are supported: the real-time Krylov basis
(states e^{-i n H tau}|phi_o>, n = 0..M-1) and the filter basis obtained by
recombining those states with per-column phases e^{-i n E_j tau} at chosen
filter energies E_j. Filter pencils are always produced classically from
measured Krylov data via the transform matrix; they are never re-measured,
because the two bases cost identically on the device and differ only in
post-processing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .estimators import CallLedger, ElementEstimator
from .pauli import apply_pauli_string
from .states import SpectralPropagator, StateVector

PENCIL_KINDS = ("KDM_H", "KDM_U", "FDM_H", "FDM_U")

# Switch from the closed-form geometric ratio to the explicit sum this close
# to the removable singularity.
_RATIO_SINGULARITY = 1e-8


@dataclass(frozen=True)
class FilterGrid:
    """Uniform grid of J filter energies spanning [e_min, e_max] inclusive."""

    e_min: float
    e_max: float
    j: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("need at least one filter energy")
        if not self.e_min < self.e_max:
            raise ValueError("filter window needs e_min < e_max")

    @property
    def energies(self) -> np.ndarray:
        return np.linspace(self.e_min, self.e_max, self.j)

    @classmethod
    def dft(cls, m: int, tau: float) -> "FilterGrid":
        """The equidistant grid E_j = 2*pi*j/(M*tau), j = 0..M-1."""
        spacing = 2.0 * np.pi / (m * tau)
        if m == 1:
            return cls(e_min=0.0, e_max=spacing, j=1)
        return cls(e_min=0.0, e_max=spacing * (m - 1), j=m)

    def to_dict(self) -> dict:
        return {"e_min": self.e_min, "e_max": self.e_max, "j": self.j}


@dataclass(frozen=True)
class FilterTransform:
    """M x J change-of-basis matrix with entries T[n, j] = e^{-i n E_j tau}."""

    matrix: np.ndarray
    grid: FilterGrid
    steps: int
    tau: float
    is_dft: bool


def build_filter_transform(grid: FilterGrid, m: int, tau: float) -> FilterTransform:
    """Transform from the M-step Krylov basis to the J-energy filter basis."""
    n = np.arange(m).reshape(-1, 1)
    energies = grid.energies.reshape(1, -1)
    matrix = np.exp(-1j * n * energies * tau)
    dft_energies = 2.0 * np.pi * np.arange(m) / (m * tau)
    is_dft = grid.j == m and bool(
        np.allclose(np.sort(grid.energies), dft_energies, rtol=0, atol=1e-9)
    )
    return FilterTransform(matrix=matrix, grid=grid, steps=m, tau=tau, is_dft=is_dft)


def _complex_matrix_json(mat: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in mat]


@dataclass(frozen=True)
class SubspacePencil:
    """Pair (F, S) of a generalized eigenvalue problem F c = f(E) S c."""

    f: np.ndarray
    s: np.ndarray
    kind: str
    tau: float
    steps: int
    grid: FilterGrid | None = None

    def __post_init__(self):
        if self.kind not in PENCIL_KINDS:
            raise ValueError(f"unknown pencil kind {self.kind!r}")
        if self.f.shape != self.s.shape or self.f.shape[0] != self.f.shape[1]:
            raise ValueError("pencil matrices must be square and same-shape")

    @property
    def dimension(self) -> int:
        return self.f.shape[0]

    @property
    def is_unitary_kind(self) -> bool:
        return self.kind.endswith("_U")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tau": self.tau,
            "steps": self.steps,
            "dimension": self.dimension,
            "grid": self.grid.to_dict() if self.grid else None,
            "f": _complex_matrix_json(self.f),
            "s": _complex_matrix_json(self.s),
        }


def toeplitz_from_moments(moments: dict[int, complex], m: int, offset: int = 0) -> np.ndarray:
    """Matrix A[n, n'] = moments[n' - n + offset], using conj for negative indices."""

    def value(k: int) -> complex:
        return moments[k] if k >= 0 else np.conj(moments[-k])

    return np.array([[value(col - row + offset) for col in range(m)] for row in range(m)])


def _pauli_state(term_string, phi: StateVector) -> StateVector:
    return StateVector(apply_pauli_string(term_string, phi.amplitudes), phi.n_qubits)


def build_kdm(
    kind: str,
    prop: SpectralPropagator,
    phi_o: StateVector,
    m: int,
    tau: float,
    estimator: ElementEstimator | None = None,
    ledger: CallLedger | None = None,
    commuting: bool = True,
) -> SubspacePencil:
    """Measure and assemble an M-step Krylov pencil.

    The overlap matrix is Toeplitz in the correlation functions C_0..C_{M-1}.
    For the e^{-iHtau} pencil, F shares those entries and needs a single
    extra correlation C_M for the corner band. For the Hamiltonian pencil,
    the default path exploits that exact propagation commutes with H, giving
    a Toeplitz F from L*M per-term elements; commuting=False instead
    measures every (n, n') pair separately (L*M^2 elements), which exists
    purely to model the accounting of circuits that do not commute with H.
    """
    if kind not in ("KDM_H", "KDM_U"):
        raise ValueError(f"build_kdm builds KDM pencils, not {kind!r}")
    if m < 1:
        raise ValueError("need at least one time step")
    if tau <= 0:
        raise ValueError("time step must be positive")
    if estimator is None:
        estimator = ElementEstimator()

    corr: dict[int, complex] = {0: 1.0 + 0.0j}
    for n in range(1, m):
        corr[n] = estimator.correlation(prop, phi_o, n, tau, ledger, category="overlap_C_n")
    s = toeplitz_from_moments(corr, m)

    if kind == "KDM_U":
        corr[m] = estimator.correlation(prop, phi_o, m, tau, ledger, category="F_U_extra")
        f = toeplitz_from_moments(corr, m, offset=1)
        return SubspacePencil(f=f, s=s, kind=kind, tau=tau, steps=m)

    hamiltonian = prop.hamiltonian
    if commuting:
        moments: dict[int, complex] = {}
        for step in range(m):
            total = 0.0 + 0.0j
            for coeff, term in hamiltonian.terms:
                total += coeff * estimator.element(
                    prop, _pauli_state(term, phi_o), phi_o, step, tau, ledger, "F_H_element"
                )
            moments[step] = total
        f = toeplitz_from_moments(moments, m)
    else:
        evolved = [prop.evolve(phi_o, n * tau) for n in range(m)]
        f = np.zeros((m, m), dtype=np.complex128)
        for row in range(m):
            for col in range(m):
                total = 0.0 + 0.0j
                for coeff, term in hamiltonian.terms:
                    total += coeff * estimator.element(
                        prop,
                        _pauli_state(term, evolved[row]),
                        evolved[col],
                        0,
                        tau,
                        ledger,
                        "F_H_element",
                    )
                f[row, col] = total
    return SubspacePencil(f=f, s=s, kind="KDM_H", tau=tau, steps=m)


def build_fdm(kdm: SubspacePencil, grid: FilterGrid) -> SubspacePencil:
    """Transform a measured Krylov pencil into the filter basis (no new calls)."""
    if kdm.kind not in ("KDM_H", "KDM_U"):
        raise ValueError("build_fdm expects a KDM pencil")
    if grid.j > kdm.steps:
        warnings.warn(
            f"{grid.j} filter energies from only {kdm.steps} time steps: "
            "the filter pencil cannot exceed rank "
            f"{kdm.steps}"
        )
    w = build_filter_transform(grid, kdm.steps, kdm.tau).matrix
    f_j = w.conj().T @ kdm.f @ w
    s_j = w.conj().T @ kdm.s @ w
    kind = "FDM_H" if kdm.kind == "KDM_H" else "FDM_U"
    return SubspacePencil(f=f_j, s=s_j, kind=kind, tau=kdm.tau, steps=kdm.steps, grid=grid)


def filter_state_coefficients(
    prop: SpectralPropagator,
    phi_o: StateVector,
    filter_energy: float,
    m: int,
    tau: float,
) -> np.ndarray:
    """Eigenbasis amplitudes of the M-term filter state at one filter energy.

    The filter state sum_{n<M} e^{-i n (H - E_j) tau}|phi_o> has amplitude
    c_k * (1 - e^{-iM(E_k-E_j)tau}) / (1 - e^{-i(E_k-E_j)tau}) on the k-th
    eigenvector, where c_k is the eigenbasis amplitude of the start state;
    at E_k = E_j the removable singularity evaluates to c_k * M.
    """
    coeffs = prop.eigenvectors.conj().T @ phi_o.amplitudes
    detuning = (prop.eigenvalues - filter_energy) * tau
    unit_ratio = np.exp(-1j * detuning)
    denom = 1.0 - unit_ratio
    amplitudes = np.empty_like(coeffs)
    near_singular = np.abs(denom) < _RATIO_SINGULARITY
    regular = ~near_singular
    amplitudes[regular] = (1.0 - np.exp(-1j * m * detuning[regular])) / denom[regular]
    if np.any(near_singular):
        powers = np.arange(m).reshape(-1, 1)
        amplitudes[near_singular] = np.sum(unit_ratio[near_singular] ** powers, axis=0)
    return coeffs * amplitudes
