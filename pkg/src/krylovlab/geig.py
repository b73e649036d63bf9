"""Robust solution of F c = f(E) S c for ill-conditioned overlap matrices.

The default path factors S by SVD, discards singular values below a
relative threshold, and solves an ordinary eigenproblem in the retained
subspace. A generalized-Schur (QZ) backend is available as an independent
dense route; the SVD path stays authoritative because its truncation rank
is explicit and reportable.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SolverError
from .subspace import SubspacePencil

DEFAULT_SVD_THRESHOLD = 1e-12
# Display convention for condition numbers beyond any meaningful precision.
KAPPA_DISPLAY_THRESHOLD = 1e17
_SYMMETRY_TOL = 1e-8
_MAGNITUDE_BAND = 0.5


@dataclass(frozen=True)
class GEigSolution:
    """Retained eigenpairs of one pencil plus stability diagnostics."""

    eigenvalues: np.ndarray
    coefficients: np.ndarray  # columns, normalized to c^dag S c = 1
    condition_number: float  # sigma_max / sigma_min of S before truncation
    condition_flagged: bool  # singular S: condition number reported as inf
    retained_rank: int
    svd_threshold: float
    residuals: np.ndarray  # ||F c - lambda S c|| / (||F|| ||c||) per pair
    kind: str
    tau: float
    backend: str

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tau": self.tau,
            "backend": self.backend,
            "condition_number": None if math.isinf(self.condition_number) else self.condition_number,
            "condition_flagged": self.condition_flagged,
            "retained_rank": self.retained_rank,
            "svd_threshold": self.svd_threshold,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
        }


@dataclass(frozen=True)
class EnergyEstimate:
    """An energy read off one pencil eigenvalue."""

    energy: float
    branch: int
    source_eigenvalue: complex
    kind: str

    @property
    def magnitude_deviation(self) -> float:
        """|lambda| - 1; a quality diagnostic for unitary-function pencils."""
        return abs(self.source_eigenvalue) - 1.0


def _overlap_svd(s: np.ndarray) -> tuple[np.ndarray, np.ndarray, float, bool]:
    asymmetry = float(np.max(np.abs(s - s.conj().T)))
    if asymmetry > _SYMMETRY_TOL:
        raise SolverError(f"overlap matrix asymmetry {asymmetry:.3e} exceeds {_SYMMETRY_TOL}")
    s_sym = (s + s.conj().T) / 2.0
    u, sigma, _ = np.linalg.svd(s_sym, hermitian=True)
    if sigma[0] <= 0:
        raise SolverError("overlap matrix is identically zero")
    if sigma[-1] < 1e-300:
        return u, sigma, math.inf, True
    kappa = float(sigma[0] / sigma[-1])
    # Flag numerically singular overlaps (rank-deficient at working precision)
    # and condition numbers beyond any displayable meaning.
    singular = sigma[-1] < s.shape[0] * np.finfo(float).eps * sigma[0]
    return u, sigma, kappa, singular or kappa > KAPPA_DISPLAY_THRESHOLD


def solve(
    pencil: SubspacePencil,
    svd_threshold: float = DEFAULT_SVD_THRESHOLD,
    backend: str = "svd_regularized",
) -> GEigSolution:
    """Solve the pencil, truncating the overlap spectrum below the relative threshold."""
    if backend not in ("svd_regularized", "generalized_schur"):
        raise ValueError(f"unknown backend {backend!r}")
    if not 0 < svd_threshold < 1:
        raise ValueError("svd_threshold is a relative value in (0, 1)")

    f, s = pencil.f, pencil.s
    u, sigma, kappa, flagged = _overlap_svd(s)

    if backend == "generalized_schur":
        return _solve_qz(pencil, f, s, kappa, flagged, svd_threshold)

    keep = sigma >= svd_threshold * sigma[0]
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        raise SolverError("no singular values retained; threshold too aggressive")
    basis = u[:, keep] / np.sqrt(sigma[keep])
    projected = basis.conj().T @ f @ basis
    eigenvalues, vectors = np.linalg.eig(projected)
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    coefficients = basis @ vectors[:, order]
    residuals = _residuals(f, s, eigenvalues, coefficients)
    return GEigSolution(
        eigenvalues=eigenvalues,
        coefficients=coefficients,
        condition_number=kappa,
        condition_flagged=flagged,
        retained_rank=rank,
        svd_threshold=svd_threshold,
        residuals=residuals,
        kind=pencil.kind,
        tau=pencil.tau,
        backend=backend,
    )


def _solve_qz(pencil, f, s, kappa, flagged, svd_threshold) -> GEigSolution:
    s_sym = (s + s.conj().T) / 2.0
    eigenvalues, vectors = scipy.linalg.eig(f, s_sym)
    finite = np.isfinite(eigenvalues)
    if not np.any(finite):
        raise SolverError("generalized Schur produced no finite eigenvalues")
    eigenvalues = eigenvalues[finite]
    vectors = vectors[:, finite]
    norms = np.einsum("ij,jk,ik->k", vectors.conj(), s_sym, vectors).real
    usable = norms > 1e-12
    eigenvalues = eigenvalues[usable]
    vectors = vectors[:, usable] / np.sqrt(norms[usable])
    order = np.lexsort((eigenvalues.imag, eigenvalues.real))
    eigenvalues = eigenvalues[order]
    vectors = vectors[:, order]
    return GEigSolution(
        eigenvalues=eigenvalues,
        coefficients=vectors,
        condition_number=kappa,
        condition_flagged=flagged,
        retained_rank=int(vectors.shape[1]),
        svd_threshold=svd_threshold,
        residuals=_residuals(f, s, eigenvalues, vectors),
        kind=pencil.kind,
        tau=pencil.tau,
        backend="generalized_schur",
    )


def _residuals(f, s, eigenvalues, coefficients) -> np.ndarray:
    f_norm = float(np.linalg.norm(f, 2))
    if f_norm == 0:
        f_norm = 1.0
    out = np.empty(len(eigenvalues))
    for k, lam in enumerate(eigenvalues):
        c = coefficients[:, k]
        out[k] = np.linalg.norm(f @ c - lam * (s @ c)) / (f_norm * np.linalg.norm(c))
    return out


def unwrap_energy(
    eigenvalue: complex, tau: float, shift: float = 0.0, branch: int = 0
) -> EnergyEstimate:
    """Energy from a unitary-pencil eigenvalue: E = (theta + 2*pi*j)/tau + shift,
    with theta the two-argument arctangent of (-Im, Re) in (-pi, pi]."""
    if tau <= 0:
        raise ValueError("time step must be positive")
    if eigenvalue == 0:
        raise SolverError("zero eigenvalue carries no phase information")
    magnitude = abs(eigenvalue)
    if abs(magnitude - 1.0) > _MAGNITUDE_BAND:
        warnings.warn(
            f"unitary-pencil eigenvalue magnitude {magnitude:.3f} far from 1; "
            "energy estimate is low quality"
        )
    theta = math.atan2(-eigenvalue.imag, eigenvalue.real)
    energy = (theta + 2.0 * math.pi * branch) / tau + shift
    return EnergyEstimate(
        energy=energy, branch=branch, source_eigenvalue=complex(eigenvalue), kind="U"
    )


def select_ground(
    solution: GEigSolution,
    kind: str | None = None,
    shift: float = 0.0,
    branch: int = 0,
) -> EnergyEstimate:
    """Ground-energy candidate from a solved pencil.

    Hamiltonian pencils: smallest real part (plus shift). Unitary pencils:
    smallest unwrapped energy; with branch 0 every unwrapped value already
    lies in the Nyquist window (shift - pi/tau, shift + pi/tau].
    """
    if len(solution.eigenvalues) == 0:
        raise SolverError("empty retained spectrum")
    kind = kind or solution.kind
    if kind.endswith("_H") or kind == "H":
        idx = int(np.argmin(solution.eigenvalues.real))
        lam = complex(solution.eigenvalues[idx])
        return EnergyEstimate(
            energy=float(lam.real) + shift,
            branch=0,
            source_eigenvalue=lam,
            kind="H",
        )
    estimates = [
        unwrap_energy(complex(lam), solution.tau, shift, branch)
        for lam in solution.eigenvalues
        if lam != 0
    ]
    if not estimates:
        raise SolverError("all retained eigenvalues are zero")
    return min(estimates, key=lambda e: e.energy)
