"""Classical simulation lab for quantum Krylov subspace diagonalization.

Four pencil algorithms (Krylov / filter basis, Hamiltonian / time-evolution
function), exact oracles, shot-noise estimator models, a multi-fidelity
element estimator, call accounting, and stability diagnostics for the
resulting generalized eigenvalue problems.
"""

from .errors import (
    ConfigError,
    DenseLimitError,
    EstimationError,
    HamiltonianFormatError,
    KrylovLabError,
    SectorError,
    SolverError,
    StateError,
)
from .estimators import (
    CallLedger,
    ElementEstimator,
    MfeContext,
    ShotModel,
    correlation,
    fidelity,
    hadamard_element,
    mfe_element,
)
from .geig import EnergyEstimate, GEigSolution, select_ground, solve, unwrap_energy
from .models import (
    ModelSpec,
    hartree_fock_state,
    heisenberg_xxz,
    plus_state,
    singlet_ansatz,
    tfim,
)
from .oracle import Spectrum, diagonalize, direct_element
from .pauli import (
    PauliString,
    PauliSumHamiltonian,
    SymmetryOperator,
    commutes,
    parse_hamiltonian,
    particle_number,
    serialize_hamiltonian,
    to_dense,
    total_z,
    vacuum_expectation,
)
from .states import SpectralPropagator, StateVector, basis_state, inner, superpose
from .subspace import (
    FilterGrid,
    FilterTransform,
    SubspacePencil,
    build_fdm,
    build_filter_transform,
    build_kdm,
    filter_state_coefficients,
)
from .workflows import (
    CHEMICAL_ACCURACY,
    ConvergenceTrace,
    HyperoptCandidate,
    RunConfig,
    excited_run,
    hyperopt,
    run_method,
    variance,
)

__version__ = "0.1.0"

__all__ = [
    "CHEMICAL_ACCURACY",
    "CallLedger",
    "ConfigError",
    "ConvergenceTrace",
    "DenseLimitError",
    "ElementEstimator",
    "EnergyEstimate",
    "EstimationError",
    "FilterGrid",
    "FilterTransform",
    "GEigSolution",
    "HamiltonianFormatError",
    "HyperoptCandidate",
    "KrylovLabError",
    "MfeContext",
    "ModelSpec",
    "PauliString",
    "PauliSumHamiltonian",
    "RunConfig",
    "SectorError",
    "ShotModel",
    "SolverError",
    "SpectralPropagator",
    "Spectrum",
    "StateError",
    "StateVector",
    "SubspacePencil",
    "SymmetryOperator",
    "basis_state",
    "build_fdm",
    "build_filter_transform",
    "build_kdm",
    "commutes",
    "correlation",
    "diagonalize",
    "direct_element",
    "excited_run",
    "fidelity",
    "filter_state_coefficients",
    "hadamard_element",
    "hartree_fock_state",
    "heisenberg_xxz",
    "hyperopt",
    "inner",
    "mfe_element",
    "parse_hamiltonian",
    "particle_number",
    "plus_state",
    "run_method",
    "select_ground",
    "serialize_hamiltonian",
    "singlet_ansatz",
    "solve",
    "superpose",
    "tfim",
    "to_dense",
    "total_z",
    "unwrap_energy",
    "vacuum_expectation",
    "variance",
]
