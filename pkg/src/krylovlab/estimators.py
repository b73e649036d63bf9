"""Simulated measurement back-ends for Krylov matrix elements.

Three interchangeable schemes produce <phi_i| e^{-i n H tau} |phi_j>:

* ``direct``:   ideal device, exact inner product, no statistical noise;
* ``hadamard``: ancilla statistics of a Hadamard test, with the real and
  imaginary parts recovered from X- and Y-basis Bernoulli outcomes;
* ``mfe``:      multi-fidelity estimation, where the element's magnitude and
  phase are reconstructed from two (optionally three) state fidelities
  against a reference state from a different symmetry sector, with the
  reference phase supplied classically.

Call accounting follows the convention that one "call" covers one circuit
configuration, with shots multiplying inside a call; a call yields both the
real and imaginary parts of an element.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import EstimationError, SectorError
from .pauli import PauliSumHamiltonian, SymmetryOperator, commutes, particle_number, vacuum_expectation
from .states import SpectralPropagator, StateVector, basis_state, inner

# Element-level categories: one entry per estimated matrix element.
ELEMENT_CATEGORIES = ("overlap_C_n", "F_H_element", "F_U_extra")
# Circuit-level categories: which simulated circuit produced the estimate.
CIRCUIT_CATEGORIES = ("fidelity_F1", "fidelity_F2", "fidelity_F3", "hadamard_call")
ALL_CATEGORIES = ELEMENT_CATEGORIES + CIRCUIT_CATEGORIES

FIDELITY_BACKENDS = ("destructive_swap", "mirror")

# Below this fidelity the element's phase carries no information.
F1_FLOOR = 1e-12
# Shot noise may push the arccos argument slightly past +-1; clamp this much.
ARCCOS_CLAMP = 0.05

SECTOR_TOL = 1e-10


class PhaseUndefinedWarning(UserWarning):
    """Raised as a warning when |element|^2 is below the floor and the phase is reported as 0."""


@dataclass
class ShotModel:
    """Measurement statistics: exact expectation values or binomial sampling."""

    mode: str = "exact"
    shots: int = 0
    seed: int = 0
    _rng: np.random.Generator | None = field(
        default=None, repr=False, compare=False, init=False
    )

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown shot mode {self.mode!r}")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs a positive shot count")

    @classmethod
    def exact(cls) -> "ShotModel":
        return cls(mode="exact")

    @classmethod
    def sampled(cls, shots: int, seed: int = 0) -> "ShotModel":
        return cls(mode="sampled", shots=shots, seed=seed)

    @property
    def is_sampled(self) -> bool:
        return self.mode == "sampled"

    @property
    def rng(self) -> np.random.Generator:
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng


class CallLedger:
    """Monotone counters of quantum-computer calls and shots per category.

    Increments are lock-protected so parallel element evaluations can share
    one ledger. Element-level categories define the headline call count;
    circuit-level categories record how each element was actually measured.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._calls = {category: 0 for category in ALL_CATEGORIES}
        self._shots = {category: 0 for category in ALL_CATEGORIES}
        self._backends: dict[str, int] = {}

    def record(self, category: str, calls: int = 1, shots: int = 0, backend: str | None = None):
        if category not in ALL_CATEGORIES:
            raise ValueError(f"unknown ledger category {category!r}")
        if calls < 0 or shots < 0:
            raise ValueError("ledger counters are monotone; negative increments rejected")
        with self._lock:
            self._calls[category] += calls
            self._shots[category] += shots
            if backend is not None:
                self._backends[backend] = self._backends.get(backend, 0) + calls

    def calls(self, category: str) -> int:
        return self._calls[category]

    def shots(self, category: str) -> int:
        return self._shots[category]

    @property
    def total_calls(self) -> int:
        """Headline count: one call per estimated matrix element."""
        return sum(self._calls[c] for c in ELEMENT_CATEGORIES)

    @property
    def total_shots(self) -> int:
        return sum(self._shots.values())

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "calls": dict(self._calls),
                "shots": dict(self._shots),
                "total_calls": self.total_calls,
                "total_shots": self.total_shots,
            }

    def to_report(self) -> dict:
        """JSON-friendly report {category: {calls, shots}} plus totals."""
        with self._lock:
            report = {
                category: {"calls": self._calls[category], "shots": self._shots[category]}
                for category in ALL_CATEGORIES
            }
            report["total_calls"] = self.total_calls
            report["total_shots"] = self.total_shots
            if self._backends:
                report["fidelity_backends"] = dict(self._backends)
            return report


def _sampled_probability(p: float, shot: ShotModel) -> float:
    p = min(max(p, 0.0), 1.0)
    return float(shot.rng.binomial(shot.shots, p)) / shot.shots


def _sample_complex(value: complex, shot: ShotModel) -> complex:
    """Ancilla statistics: X/Y-basis outcomes are Bernoulli((1 +- Re/Im)/2)."""
    re = 2.0 * _sampled_probability((1.0 + value.real) / 2.0, shot) - 1.0
    im = 2.0 * _sampled_probability((1.0 + value.imag) / 2.0, shot) - 1.0
    return complex(re, im)


def fidelity(
    psi_a: StateVector,
    psi_b: StateVector,
    shot: ShotModel,
    ledger: CallLedger | None = None,
    category: str = "fidelity_F1",
    backend: str = "mirror",
) -> float:
    """|<psi_a|psi_b>|^2, exact or drawn as Binomial(shots, F)/shots.

    Destructive-SWAP and mirror circuits share this statistical model; the
    backend tag only affects ledger metadata (their difference is circuit
    depth and register count, not outcome statistics).
    """
    if backend not in FIDELITY_BACKENDS:
        raise ValueError(f"unknown fidelity backend {backend!r}")
    value = abs(inner(psi_a, psi_b)) ** 2
    if shot.is_sampled:
        value = _sampled_probability(value, shot)
    if ledger is not None:
        ledger.record(category, shots=shot.shots if shot.is_sampled else 0, backend=backend)
    return float(value)


def correlation(
    prop: SpectralPropagator,
    phi_o: StateVector,
    n: int,
    tau: float,
    shot: ShotModel,
    ledger: CallLedger | None = None,
    category: str = "overlap_C_n",
) -> complex:
    """C_n(tau) = <phi_o| e^{-i n H tau} |phi_o>. C_0 = 1 is free of charge."""
    if n < 0:
        raise ValueError("correlation index must be non-negative; use conj for -n")
    if n == 0:
        return 1.0 + 0.0j
    value = inner(phi_o, prop.evolve(phi_o, n * tau))
    if shot.is_sampled:
        value = _sample_complex(value, shot)
    if ledger is not None:
        ledger.record(category, shots=shot.shots if shot.is_sampled else 0)
    return value


def hadamard_element(
    prop: SpectralPropagator,
    phi_i: StateVector,
    phi_j: StateVector,
    n: int,
    tau: float,
    shot: ShotModel,
    ledger: CallLedger | None = None,
) -> complex:
    """<phi_i| e^{-i n H tau} |phi_j> via simulated Hadamard-test ancilla statistics."""
    value = inner(phi_i, prop.evolve(phi_j, n * tau))
    if shot.is_sampled:
        value = _sample_complex(value, shot)
    if ledger is not None:
        ledger.record("hadamard_call", shots=shot.shots if shot.is_sampled else 0)
    return value


@dataclass(frozen=True)
class MfeContext:
    """Reference-state bookkeeping for multi-fidelity estimation.

    The reference must live in a different symmetry sector than every target
    state, and its time evolution must be classically known. For the vacuum
    reference under a particle-conserving Hamiltonian the vacuum spans its
    sector alone, so it is an exact eigenstate: amplitude 1 and phase
    -n*tau*<0|H|0>.
    """

    reference: StateVector
    reference_amplitude: float
    reference_phase: Callable[[int, float], float]
    symmetry: SymmetryOperator

    @classmethod
    def vacuum(
        cls, h: PauliSumHamiltonian, symmetry: SymmetryOperator | None = None
    ) -> "MfeContext":
        if symmetry is None:
            symmetry = particle_number(h.n_qubits)
        if not commutes(h, symmetry):
            raise SectorError("Hamiltonian does not commute with the chosen symmetry")
        e_vac = vacuum_expectation(h)
        return cls(
            reference=basis_state(h.n_qubits, "0" * h.n_qubits),
            reference_amplitude=1.0,
            reference_phase=lambda n, tau: -n * tau * e_vac,
            symmetry=symmetry,
        )

    def check_sector(self, state: StateVector, name: str = "state"):
        overlap = inner(self.reference, state)
        if abs(overlap) > SECTOR_TOL:
            raise SectorError(
                f"{name} overlaps the reference sector (<R|{name}> = {overlap:.3e})"
            )


def _halved_superposition(a: StateVector, b: StateVector, phase_a: complex = 1.0) -> StateVector:
    return StateVector((phase_a * a.amplitudes + b.amplitudes) / np.sqrt(2.0), a.n_qubits)


def _phase_component(numerator: float, scale: float, kind: str) -> float:
    value = numerator / scale
    if abs(value) > 1.0:
        if abs(value) - 1.0 > ARCCOS_CLAMP:
            raise EstimationError(
                f"{kind} reconstruction argument {value:.4f} is outside [-1, 1] by more "
                f"than {ARCCOS_CLAMP}; shot noise too large for phase recovery"
            )
        value = math.copysign(1.0, value)
    return value


def mfe_element(
    ctx: MfeContext,
    prop: SpectralPropagator,
    phi_i: StateVector,
    phi_j: StateVector,
    n: int,
    tau: float,
    shot: ShotModel,
    ledger: CallLedger | None = None,
    three_phase: bool = True,
    backend: str = "mirror",
) -> complex:
    """<phi_i| e^{-i n H tau} |phi_j> reconstructed from state fidelities.

    F1 fixes the magnitude; F2 (target+reference superposition) fixes
    cos(theta - theta_R). The inverse cosine alone cannot pick the sign, so
    by default a third fidelity with the reference branch rotated by pi/2
    supplies sin(theta - theta_R); pass three_phase=False for the bare
    two-fidelity protocol whose phase lands in [0, pi] relative to the
    reference.
    """
    ctx.check_sector(phi_i, "phi_i")
    ctx.check_sector(phi_j, "phi_j")

    t = n * tau
    evolved_j = prop.evolve(phi_j, t)
    f1 = fidelity(phi_i, evolved_j, shot, ledger, category="fidelity_F1", backend=backend)

    sup_i = _halved_superposition(ctx.reference, phi_i)
    sup_j = _halved_superposition(ctx.reference, phi_j)
    evolved_sup_j = prop.evolve(sup_j, t)
    f2 = fidelity(sup_i, evolved_sup_j, shot, ledger, category="fidelity_F2", backend=backend)

    r_ref = ctx.reference_amplitude
    theta_ref = ctx.reference_phase(n, tau)

    if f1 < F1_FLOOR:
        warnings.warn(
            "element magnitude below floor; phase undefined, reporting 0",
            PhaseUndefinedWarning,
        )
        return 0.0 + 0.0j

    r = math.sqrt(f1)
    scale = 2.0 * r_ref * r
    cos_delta = _phase_component(4.0 * f2 - f1 - r_ref**2, scale, "cosine")

    if three_phase:
        sup_j_rotated = _halved_superposition(ctx.reference, phi_j, phase_a=1j)
        evolved_rotated = prop.evolve(sup_j_rotated, t)
        f3 = fidelity(
            sup_i, evolved_rotated, shot, ledger, category="fidelity_F3", backend=backend
        )
        sin_delta = _phase_component(4.0 * f3 - f1 - r_ref**2, scale, "sine")
        delta = math.atan2(sin_delta, cos_delta)
    else:
        delta = math.acos(cos_delta)

    theta = delta + theta_ref
    return r * complex(math.cos(theta), math.sin(theta))


@dataclass
class ElementEstimator:
    """Scheme selector used by the pencil builders.

    ``element`` produces one matrix element and charges one element-level
    call to the given category; the underlying scheme additionally records
    its own circuit-level entries (hadamard_call or fidelity_F*).
    """

    scheme: str = "direct"
    shot: ShotModel = field(default_factory=ShotModel.exact)
    mfe: MfeContext | None = None
    three_phase: bool = True
    backend: str = "mirror"

    def __post_init__(self):
        if self.scheme not in ("direct", "hadamard", "mfe"):
            raise ValueError(f"unknown estimator scheme {self.scheme!r}")
        if self.scheme == "mfe" and self.mfe is None:
            raise ValueError("mfe scheme needs an MfeContext")

    def element(
        self,
        prop: SpectralPropagator,
        phi_i: StateVector,
        phi_j: StateVector,
        n: int,
        tau: float,
        ledger: CallLedger | None,
        category: str,
    ) -> complex:
        if self.scheme == "direct":
            value = inner(phi_i, prop.evolve(phi_j, n * tau))
        elif self.scheme == "hadamard":
            value = hadamard_element(prop, phi_i, phi_j, n, tau, self.shot, ledger)
        else:
            value = mfe_element(
                self.mfe,
                prop,
                phi_i,
                phi_j,
                n,
                tau,
                self.shot,
                ledger,
                three_phase=self.three_phase,
                backend=self.backend,
            )
        if ledger is not None:
            ledger.record(category)
        return value

    def correlation(
        self,
        prop: SpectralPropagator,
        phi_o: StateVector,
        n: int,
        tau: float,
        ledger: CallLedger | None,
        category: str = "overlap_C_n",
    ) -> complex:
        if n < 0:
            raise ValueError("correlation index must be non-negative; use conj for -n")
        if n == 0:
            return 1.0 + 0.0j
        return self.element(prop, phi_o, phi_o, n, tau, ledger, category)
