"""End-to-end drivers: convergence traces, variance monitoring, grid search.

A run grows the Krylov pencil one time step at a time, reusing every
measured correlation and Hamiltonian moment from earlier steps, so the call
ledger after M steps matches what a single M-step build would have cost.
Energy shifting is classical post-processing on the measured data: shifting
H by s multiplies C_n by e^{i s n tau} and never touches the device.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, KrylovLabError, SolverError
from .estimators import CallLedger, ElementEstimator, MfeContext, ShotModel
from .geig import DEFAULT_SVD_THRESHOLD, select_ground, solve
from .oracle import Spectrum, diagonalize, nearest_eigenvalue
from .pauli import PauliSumHamiltonian, apply_pauli_string
from .states import SpectralPropagator, StateVector
from .subspace import FilterGrid, SubspacePencil, build_filter_transform, toeplitz_from_moments

logger = logging.getLogger(__name__)

METHODS = ("KDM_H", "KDM_U", "FDM_H", "FDM_U")
SHIFT_POLICIES = ("none", "hf", "mid_spectrum")

# 1 kcal/mol in Hartree: the reporting bar for "chemically accurate" energies.
CHEMICAL_ACCURACY = 1.59e-3

WINDOW_PRESETS = {
    "narrow": (-0.3, 0.2),
    "wide": (-20.0, 20.0),
}


def preset_window(name: str, reference_energy: float) -> tuple[float, float]:
    """Named filter window placed relative to a reference energy."""
    if name not in WINDOW_PRESETS:
        raise ConfigError(f"unknown window preset {name!r}")
    lo, hi = WINDOW_PRESETS[name]
    return reference_energy + lo, reference_energy + hi


def default_svd_threshold(shot: ShotModel) -> float:
    """Exact data: near machine precision. Sampled data: ten times the
    per-element shot-noise scale 1/sqrt(shots)."""
    if shot.is_sampled:
        return min(0.5, 10.0 / np.sqrt(shot.shots))
    return DEFAULT_SVD_THRESHOLD


@dataclass
class RunConfig:
    """Everything a single convergence run needs besides the model itself."""

    method: str = "KDM_U"
    tau: float = 0.1
    m_max: int = 8
    window: tuple[float, float] | None = None
    window_preset: str | None = None
    j: int | None = None
    dft_grid: bool = False
    shot: ShotModel = field(default_factory=ShotModel.exact)
    estimator_scheme: str = "direct"
    three_phase: bool = True
    svd_threshold: float | None = None
    shift_policy: str = "mid_spectrum"
    branch: int = 0
    seed: int = 0
    stop_variance: float = 1e-8
    commuting: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.tau <= 0:
            raise ConfigError("tau must be positive")
        if self.m_max < 1:
            raise ConfigError("m_max must be at least 1")
        if self.shift_policy not in SHIFT_POLICIES:
            raise ConfigError(f"unknown shift policy {self.shift_policy!r}")
        if self.is_filter_method and self.j is None and not self.dft_grid:
            raise ConfigError(
                f"{self.method} needs a filter energy count 'j' (or dft_grid)"
            )
        if self.window is not None and not self.window[0] < self.window[1]:
            raise ConfigError("window needs e_min < e_max")

    @property
    def is_filter_method(self) -> bool:
        return self.method.startswith("FDM")

    @property
    def is_unitary_method(self) -> bool:
        return self.method.endswith("_U")

    def resolved_threshold(self) -> float:
        return self.svd_threshold if self.svd_threshold is not None else default_svd_threshold(self.shot)


@dataclass
class TraceStep:
    step: int
    energy: float
    delta_e: float
    kappa: float
    kappa_flagged: bool
    variance: float
    retained_rank: int
    calls: int
    shots: int
    ok: bool = True
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "energy": self.energy,
            "delta_e": self.delta_e,
            "kappa": self.kappa,
            "kappa_flagged": self.kappa_flagged,
            "variance": self.variance,
            "retained_rank": self.retained_rank,
            "calls": self.calls,
            "shots": self.shots,
            "ok": self.ok,
            "message": self.message,
        }


@dataclass
class ConvergenceTrace:
    method: str
    rows: list[TraceStep]
    oracle_ground_energy: float
    shift: float
    stopped_early: bool
    ledger_report: dict

    @property
    def final(self) -> TraceStep:
        for row in reversed(self.rows):
            if row.ok:
                return row
        return self.rows[-1]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "oracle_ground_energy": self.oracle_ground_energy,
            "shift": self.shift,
            "stopped_early": self.stopped_early,
            "rows": [row.to_dict() for row in self.rows],
            "ledger": self.ledger_report,
        }


def variance(f_unitary: np.ndarray, s: np.ndarray, c: np.ndarray) -> float:
    """Var[e^{-iHtau}] = 1 - |c^dag F_U c|^2 with c normalized to c^dag S c = 1.

    Computed purely from stored pencil data; monitoring it costs nothing on
    the device. Zero exactly when c describes a Hamiltonian eigenstate.
    """
    c = np.asarray(c, dtype=np.complex128)
    ns = float(np.real(np.vdot(c, s @ c)))
    if ns <= 1e-300:
        raise ValueError("coefficient vector has zero overlap norm")
    c = c / np.sqrt(ns)
    value = 1.0 - abs(np.vdot(c, f_unitary @ c)) ** 2
    if value < 0.0 or value > 1.0:
        logger.info("variance %.3e clamped into [0, 1]", value)
        value = min(max(value, 0.0), 1.0)
    return float(value)


class KrylovData:
    """Incrementally measured correlations and Hamiltonian moments.

    Every quantity is measured at most once; later pencil sizes reuse it.
    Element-level ledger categories follow the role a value plays when it is
    first measured (overlap entry, unitary-pencil corner, or H moment).
    """

    def __init__(
        self,
        prop: SpectralPropagator,
        phi_o: StateVector,
        estimator: ElementEstimator,
        ledger: CallLedger,
    ):
        self.prop = prop
        self.phi_o = phi_o
        self.estimator = estimator
        self.ledger = ledger
        self.tau: float | None = None
        self._corr: dict[int, complex] = {0: 1.0 + 0.0j}
        self._moments: dict[int, complex] = {}

    def _bind_tau(self, tau: float):
        if self.tau is None:
            self.tau = tau
        elif self.tau != tau:
            raise ValueError("one KrylovData instance serves a single time step size")

    def correlation(self, n: int, tau: float, category: str = "overlap_C_n") -> complex:
        self._bind_tau(tau)
        if n not in self._corr:
            self._corr[n] = self.estimator.correlation(
                self.prop, self.phi_o, n, tau, self.ledger, category=category
            )
        return self._corr[n]

    def h_moment(self, step: int, tau: float) -> complex:
        """<phi_o| H e^{-i step H tau} |phi_o> as a sum of per-term elements."""
        self._bind_tau(tau)
        if step not in self._moments:
            total = 0.0 + 0.0j
            for coeff, term in self.prop.hamiltonian.terms:
                rotated = StateVector(
                    apply_pauli_string(term, self.phi_o.amplitudes), self.phi_o.n_qubits
                )
                total += coeff * self.estimator.element(
                    self.prop, rotated, self.phi_o, step, tau, self.ledger, "F_H_element"
                )
            self._moments[step] = total
        return self._moments[step]

    def overlap_matrix(self, m: int, tau: float, shift: float = 0.0) -> np.ndarray:
        values = {
            n: self.correlation(n, tau) * np.exp(1j * shift * n * tau) for n in range(m)
        }
        return toeplitz_from_moments(values, m, offset=0)

    def unitary_f_matrix(self, m: int, tau: float, shift: float = 0.0) -> np.ndarray:
        for n in range(m):
            self.correlation(n, tau)
        self.correlation(m, tau, category="F_U_extra")
        values = {
            n: self.correlation(n, tau) * np.exp(1j * shift * n * tau)
            for n in range(m + 1)
        }
        return toeplitz_from_moments(values, m, offset=1)

    def hamiltonian_f_matrix(self, m: int, tau: float, shift: float = 0.0) -> np.ndarray:
        values = {}
        for step in range(m):
            moment = self.h_moment(step, tau)
            if shift:
                moment = (moment - shift * self.correlation(step, tau)) * np.exp(
                    1j * shift * step * tau
                )
            values[step] = moment
        return toeplitz_from_moments(values, m, offset=0)

    def kdm_pencil(self, kind: str, m: int, tau: float, shift: float = 0.0) -> SubspacePencil:
        s = self.overlap_matrix(m, tau, shift)
        if kind.endswith("_U"):
            f = self.unitary_f_matrix(m, tau, shift)
            return SubspacePencil(f=f, s=s, kind="KDM_U", tau=tau, steps=m)
        f = self.hamiltonian_f_matrix(m, tau, shift)
        return SubspacePencil(f=f, s=s, kind="KDM_H", tau=tau, steps=m)


def _build_estimator(config: RunConfig, h: PauliSumHamiltonian) -> ElementEstimator:
    # Fresh shot model per run: the run seed owns the random stream, and a
    # reused config must not continue a previous run's stream.
    if config.shot.is_sampled:
        shot = ShotModel.sampled(config.shot.shots, config.seed)
    else:
        shot = ShotModel.exact()
    mfe = MfeContext.vacuum(h) if config.estimator_scheme == "mfe" else None
    return ElementEstimator(
        scheme=config.estimator_scheme,
        shot=shot,
        mfe=mfe,
        three_phase=config.three_phase,
    )


def _resolve_shift(config: RunConfig, spectrum: Spectrum, reference_energy: float) -> float:
    if config.shift_policy == "none":
        return 0.0
    if config.shift_policy == "hf":
        return reference_energy
    return (float(spectrum.eigenvalues[0]) + float(spectrum.eigenvalues[-1])) / 2.0


def _resolve_grid(config: RunConfig, reference_energy: float, shift: float) -> FilterGrid:
    if config.window is not None:
        e_min, e_max = config.window
    else:
        e_min, e_max = preset_window(config.window_preset or "wide", reference_energy)
    # Grid energies live on the shifted energy axis, like the pencil data.
    return FilterGrid(e_min=e_min - shift, e_max=e_max - shift, j=config.j)


def run_method(
    config: RunConfig,
    h: PauliSumHamiltonian,
    phi_o: StateVector,
    prop: SpectralPropagator | None = None,
) -> ConvergenceTrace:
    """Grow the configured pencil to M_max steps, solving and logging each size."""
    if prop is None:
        prop = SpectralPropagator.from_hamiltonian(h)
    elif prop.fingerprint != h.fingerprint():
        raise ConfigError("propagator was built from a different Hamiltonian")
    spectrum = diagonalize(h)
    reference_energy = prop.expectation(phi_o)
    shift = _resolve_shift(config, spectrum, reference_energy)
    threshold = config.resolved_threshold()
    estimator = _build_estimator(config, h)
    ledger = CallLedger()
    data = KrylovData(prop, phi_o, estimator, ledger)
    grid = None
    if config.is_filter_method and not config.dft_grid:
        grid = _resolve_grid(config, reference_energy, shift)

    base_kind = "KDM_U" if config.is_unitary_method else "KDM_H"
    rows: list[TraceStep] = []
    stopped_early = False
    for m in range(1, config.m_max + 1):
        try:
            pencil = data.kdm_pencil(base_kind, m, config.tau, shift)
            f_unitary = (
                pencil.f
                if base_kind == "KDM_U"
                else data.unitary_f_matrix(m, config.tau, shift)
            )
            s_matrix = pencil.s
            if config.is_filter_method:
                step_grid = FilterGrid.dft(m, config.tau) if config.dft_grid else grid
                transform = build_filter_transform(step_grid, m, config.tau).matrix
                pencil = SubspacePencil(
                    f=transform.conj().T @ pencil.f @ transform,
                    s=transform.conj().T @ pencil.s @ transform,
                    kind=config.method,
                    tau=config.tau,
                    steps=m,
                    grid=step_grid,
                )
                f_unitary = transform.conj().T @ f_unitary @ transform
                s_matrix = pencil.s
            solution = solve(pencil, svd_threshold=threshold)
            ground = select_ground(solution, shift=shift, branch=config.branch)
            idx = int(np.argmin(np.abs(solution.eigenvalues - ground.source_eigenvalue)))
            var = variance(f_unitary, s_matrix, solution.coefficients[:, idx])
            snap = ledger.snapshot()
            rows.append(
                TraceStep(
                    step=m,
                    energy=ground.energy,
                    delta_e=abs(ground.energy - spectrum.ground_energy),
                    kappa=solution.condition_number,
                    kappa_flagged=solution.condition_flagged,
                    variance=var,
                    retained_rank=solution.retained_rank,
                    calls=snap["total_calls"],
                    shots=snap["total_shots"],
                )
            )
            if var < config.stop_variance:
                stopped_early = m < config.m_max
                break
        except KrylovLabError as exc:
            snap = ledger.snapshot()
            rows.append(
                TraceStep(
                    step=m,
                    energy=float("nan"),
                    delta_e=float("nan"),
                    kappa=float("nan"),
                    kappa_flagged=False,
                    variance=float("nan"),
                    retained_rank=0,
                    calls=snap["total_calls"],
                    shots=snap["total_shots"],
                    ok=False,
                    message=str(exc),
                )
            )
            logger.warning("step %d failed: %s", m, exc)
    return ConvergenceTrace(
        method=config.method,
        rows=rows,
        oracle_ground_energy=spectrum.ground_energy,
        shift=shift,
        stopped_early=stopped_early,
        ledger_report=ledger.to_report(),
    )


@dataclass(frozen=True)
class HyperoptCandidate:
    e_min: float
    e_max: float
    j: int

    @property
    def width(self) -> float:
        return self.e_max - self.e_min


@dataclass
class HyperoptRow:
    candidate: HyperoptCandidate
    variance: float
    energy: float
    ok: bool
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "e_min": self.candidate.e_min,
            "e_max": self.candidate.e_max,
            "j": self.candidate.j,
            "variance": self.variance,
            "energy": self.energy,
            "ok": self.ok,
            "message": self.message,
        }


@dataclass
class HyperoptResult:
    best: HyperoptCandidate
    best_row: HyperoptRow
    table: list[HyperoptRow]
    ledger_report: dict

    def to_dict(self) -> dict:
        return {
            "best": self.best_row.to_dict(),
            "table": [row.to_dict() for row in self.table],
            "ledger": self.ledger_report,
        }


def hyperopt(
    config: RunConfig,
    h: PauliSumHamiltonian,
    phi_o: StateVector,
    candidates: list[HyperoptCandidate],
    prop: SpectralPropagator | None = None,
) -> HyperoptResult:
    """Grid-search filter windows and energy counts on one set of measured data.

    All candidates are scored from the same M_max-step Krylov measurements;
    the search itself performs no additional device calls. Candidates are
    ranked by the variance of their ground vector; ties break toward fewer
    filter energies, then the narrower window.
    """
    if not candidates:
        raise ConfigError("empty hyperopt candidate list")
    if prop is None:
        prop = SpectralPropagator.from_hamiltonian(h)
    elif prop.fingerprint != h.fingerprint():
        raise ConfigError("propagator was built from a different Hamiltonian")
    spectrum = diagonalize(h)
    reference_energy = prop.expectation(phi_o)
    shift = _resolve_shift(config, spectrum, reference_energy)
    threshold = config.resolved_threshold()
    estimator = _build_estimator(config, h)
    ledger = CallLedger()
    data = KrylovData(prop, phi_o, estimator, ledger)

    base_kind = "KDM_U" if config.is_unitary_method else "KDM_H"
    m = config.m_max
    kdm = data.kdm_pencil(base_kind, m, config.tau, shift)
    f_unitary = data.unitary_f_matrix(m, config.tau, shift)
    calls_after_measurement = ledger.snapshot()["total_calls"]

    rows: list[HyperoptRow] = []
    for cand in candidates:
        grid = FilterGrid(e_min=cand.e_min - shift, e_max=cand.e_max - shift, j=cand.j)
        try:
            transform = build_filter_transform(grid, m, config.tau).matrix
            pencil = SubspacePencil(
                f=transform.conj().T @ kdm.f @ transform,
                s=transform.conj().T @ kdm.s @ transform,
                kind="FDM_U" if config.is_unitary_method else "FDM_H",
                tau=config.tau,
                steps=m,
                grid=grid,
            )
            solution = solve(pencil, svd_threshold=threshold)
            ground = select_ground(solution, shift=shift, branch=config.branch)
            idx = int(np.argmin(np.abs(solution.eigenvalues - ground.source_eigenvalue)))
            f_u_j = transform.conj().T @ f_unitary @ transform
            var = variance(f_u_j, pencil.s, solution.coefficients[:, idx])
            rows.append(HyperoptRow(candidate=cand, variance=var, energy=ground.energy, ok=True))
        except KrylovLabError as exc:
            rows.append(
                HyperoptRow(
                    candidate=cand,
                    variance=float("nan"),
                    energy=float("nan"),
                    ok=False,
                    message=str(exc),
                )
            )
    if ledger.snapshot()["total_calls"] != calls_after_measurement:
        raise RuntimeError("hyperopt scoring must not trigger new measurements")

    usable = [row for row in rows if row.ok]
    if not usable:
        raise SolverError("every hyperopt candidate failed to solve")
    best_row = min(
        usable, key=lambda row: (row.variance, row.candidate.j, row.candidate.width)
    )
    return HyperoptResult(
        best=best_row.candidate,
        best_row=best_row,
        table=rows,
        ledger_report=ledger.to_report(),
    )


@dataclass
class ExcitedStateResult:
    index: int
    trace: ConvergenceTrace | None
    assigned_level: int | None
    assigned_energy: float | None
    delta_e: float | None
    ok: bool
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "ok": self.ok,
            "message": self.message,
            "assigned_level": self.assigned_level,
            "assigned_energy": self.assigned_energy,
            "delta_e": self.delta_e,
            "trace": self.trace.to_dict() if self.trace else None,
        }


def excited_run(
    config: RunConfig, h: PauliSumHamiltonian, ansatz_states: list[StateVector]
) -> list[ExcitedStateResult]:
    """Independent convergence run per ansatz state, with per-state isolation.

    Each final energy is assigned to the nearest exact eigenvalue; a state
    orthogonal to the sector of interest will simply converge elsewhere (or
    fail), without affecting the other runs.
    """
    spectrum = diagonalize(h)
    results: list[ExcitedStateResult] = []
    for index, state in enumerate(ansatz_states):
        try:
            trace = run_method(config, h, state)
            final = trace.final
            if not final.ok:
                raise SolverError(final.message or "no usable trace step")
            level, energy = nearest_eigenvalue(spectrum, final.energy)
            results.append(
                ExcitedStateResult(
                    index=index,
                    trace=trace,
                    assigned_level=level,
                    assigned_energy=energy,
                    delta_e=abs(final.energy - energy),
                    ok=True,
                )
            )
        except KrylovLabError as exc:
            results.append(
                ExcitedStateResult(
                    index=index,
                    trace=None,
                    assigned_level=None,
                    assigned_energy=None,
                    delta_e=None,
                    ok=False,
                    message=str(exc),
                )
            )
    return results
