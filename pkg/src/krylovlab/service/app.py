"""HTTP face of the lab: runs, sweeps, grid searches, spectra, call reports.

The service owns a propagator cache keyed by Hamiltonian content, so a
sweep or a sequence of runs against the same operator pays for the dense
eigendecomposition once. All numerics live in the core package; this layer
resolves declarative requests into core objects and sanitizes the results
for JSON.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import ConfigError, HamiltonianFormatError, KrylovLabError, StateError
from ..estimators import ShotModel
from ..models import ModelSpec, hartree_fock_state, plus_state, singlet_ansatz
from ..oracle import diagonalize
from ..pauli import PauliSumHamiltonian
from ..states import SpectralPropagator, StateVector, basis_state
from ..workflows import (
    ConvergenceTrace,
    HyperoptCandidate,
    RunConfig,
    hyperopt,
    preset_window,
    run_method,
)
from . import schemas

_CONFIG_ERRORS = (ConfigError, HamiltonianFormatError, StateError, ValueError)


class PropagatorCache:
    """Content-addressed cache of spectral propagators."""

    def __init__(self, max_entries: int = 16):
        self._lock = threading.Lock()
        self._entries: dict[str, SpectralPropagator] = {}
        self._max_entries = max_entries

    def get(self, h: PauliSumHamiltonian) -> SpectralPropagator:
        key = h.fingerprint()
        with self._lock:
            if key in self._entries:
                return self._entries[key]
        prop = SpectralPropagator.from_hamiltonian(h)
        with self._lock:
            if len(self._entries) >= self._max_entries:
                self._entries.pop(next(iter(self._entries)))
            self._entries[key] = prop
        return prop

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


def resolve_hamiltonian(spec: schemas.HamiltonianSpec) -> PauliSumHamiltonian:
    model = ModelSpec(
        family=spec.family,
        n_qubits=spec.n_qubits,
        coupling=spec.coupling,
        field=spec.field,
        delta=spec.delta,
        text=spec.text,
    )
    return model.build()


def resolve_state(spec: schemas.StateSpec, n_qubits: int) -> StateVector:
    if spec.kind == "hartree_fock":
        return hartree_fock_state(n_qubits, spec.occupied)
    if spec.kind == "basis":
        return basis_state(n_qubits, spec.bits)
    if spec.kind == "plus":
        return plus_state(n_qubits)
    return singlet_ansatz(n_qubits, spec.pattern_a, spec.pattern_b)


def resolve_run_config(settings: schemas.RunSettings) -> RunConfig:
    window = None
    if settings.window_min is not None:
        window = (settings.window_min, settings.window_max)
    return RunConfig(
        method=settings.method,
        tau=settings.tau,
        m_max=settings.m_max,
        window=window,
        window_preset=settings.window_preset,
        j=settings.j,
        dft_grid=settings.dft_grid,
        shot=ShotModel.exact(),  # replaced below when sampled
        estimator_scheme=settings.estimator,
        three_phase=settings.three_phase,
        svd_threshold=settings.svd_threshold,
        shift_policy=settings.shift_policy,
        branch=settings.branch,
        seed=settings.seed,
        stop_variance=settings.stop_variance,
        commuting=settings.commuting,
    )


def build_run_config(request: schemas.RunRequest) -> RunConfig:
    config = resolve_run_config(request.run)
    if request.shots.mode == "sampled":
        config.shot = ShotModel.sampled(request.shots.shots, request.run.seed)
    return config


def _run_response(
    request: schemas.RunRequest, h: PauliSumHamiltonian, trace: ConvergenceTrace
) -> schemas.RunResponse:
    return schemas.RunResponse(
        resolved=request,
        n_qubits=h.n_qubits,
        l_terms=h.L,
        method=trace.method,
        oracle_ground_energy=trace.oracle_ground_energy,
        shift=trace.shift,
        stopped_early=trace.stopped_early,
        rows=[schemas.TraceRow.from_step(row) for row in trace.rows],
        ledger=trace.ledger_report,
    )


def predict_calls(
    method: str, m_steps: int, l_terms: int, commuting: bool
) -> schemas.LedgerPrediction:
    """Expected element-level call counts for a monitored convergence run.

    Unitary-function pencils: M correlation calls total. Hamiltonian-function
    pencils: L*M per-term elements when the circuit commutes with H (L*M^2
    otherwise), M-1 overlap correlations, plus one extra correlation for the
    variance monitor's corner entry.
    """
    if method.endswith("_U"):
        return schemas.LedgerPrediction(
            formula="M",
            overlap_calls=m_steps - 1,
            f_element_calls=0,
            total_calls=m_steps,
        )
    f_calls = l_terms * m_steps if commuting else l_terms * m_steps * m_steps
    return schemas.LedgerPrediction(
        formula=("L*M + (M-1) + 1" if commuting else "L*M^2 + (M-1) + 1"),
        overlap_calls=m_steps - 1,
        f_element_calls=f_calls,
        total_calls=f_calls + m_steps,
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="krylovlab",
        description="Krylov subspace diagonalization lab: pencils, estimators, call accounting",
        version="0.1.0",
    )
    cache = PropagatorCache()

    @app.exception_handler(KrylovLabError)
    async def _domain_error(request: Request, exc: KrylovLabError):
        kind = "config" if isinstance(exc, _CONFIG_ERRORS) else "numerical"
        return JSONResponse(
            status_code=400, content={"detail": str(exc), "kind": kind}
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"detail": str(exc), "kind": "config"}
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", cached_propagators=len(cache))

    @app.post("/run", response_model=schemas.RunResponse)
    def run(request: schemas.RunRequest):
        h = resolve_hamiltonian(request.hamiltonian)
        phi = resolve_state(request.state, h.n_qubits)
        config = build_run_config(request)
        trace = run_method(config, h, phi, prop=cache.get(h))
        return _run_response(request, h, trace)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(request: schemas.SweepRequest):
        rows = []
        for value in request.axis.values:
            point = request.base.model_copy(deep=True)
            section, key = request.axis.parameter.split(".", 1)
            target = point.hamiltonian if section == "hamiltonian" else point.run
            setattr(target, key, value)
            try:
                h = resolve_hamiltonian(point.hamiltonian)
                phi = resolve_state(point.state, h.n_qubits)
                config = build_run_config(point)
                trace = run_method(config, h, phi, prop=cache.get(h))
                final = trace.final
                if not final.ok:
                    raise ConfigError(final.message or "no usable trace step")
                rows.append(
                    schemas.SweepRow(
                        value=value,
                        ok=True,
                        steps=final.step,
                        energy=final.energy,
                        delta_e=final.delta_e,
                        kappa=schemas.clean_float(final.kappa),
                        variance=schemas.clean_float(final.variance),
                        calls=final.calls,
                        shots=final.shots,
                    )
                )
            except (KrylovLabError, ValueError) as exc:
                rows.append(schemas.SweepRow(value=value, ok=False, message=str(exc)))
        return schemas.SweepResponse(resolved=request, rows=rows)

    @app.post("/hyperopt", response_model=schemas.HyperoptResponse)
    def hyperopt_endpoint(request: schemas.HyperoptRequest):
        h = resolve_hamiltonian(request.base.hamiltonian)
        phi = resolve_state(request.base.state, h.n_qubits)
        config = build_run_config(request.base)
        prop = cache.get(h)
        windows = list(request.windows)
        if request.window_presets:
            reference = prop.expectation(phi)
            windows += [preset_window(name, reference) for name in request.window_presets]
        candidates = [
            HyperoptCandidate(e_min=lo, e_max=hi, j=j)
            for lo, hi in windows
            for j in request.j_values
        ]
        result = hyperopt(config, h, phi, candidates, prop=prop)

        def to_row(row) -> schemas.HyperoptRow:
            return schemas.HyperoptRow(
                e_min=row.candidate.e_min,
                e_max=row.candidate.e_max,
                j=row.candidate.j,
                variance=schemas.clean_float(row.variance),
                energy=schemas.clean_float(row.energy),
                ok=row.ok,
                message=row.message,
            )

        return schemas.HyperoptResponse(
            resolved=request,
            best=to_row(result.best_row),
            table=[to_row(row) for row in result.table],
            ledger=result.ledger_report,
        )

    @app.post("/spectrum", response_model=schemas.SpectrumResponse)
    def spectrum(request: schemas.SpectrumRequest):
        h = resolve_hamiltonian(request.hamiltonian)
        spec = diagonalize(h)
        eigenvalues = [float(v) for v in spec.eigenvalues]
        if request.max_eigenvalues is not None:
            eigenvalues = eigenvalues[: request.max_eigenvalues]
        return schemas.SpectrumResponse(
            n_qubits=h.n_qubits,
            l_terms=h.L,
            ground_energy=spec.ground_energy,
            eigenvalues=eigenvalues,
        )

    @app.post("/ledger", response_model=schemas.LedgerResponse)
    def ledger(request: schemas.LedgerRequest):
        prediction = predict_calls(
            request.method, request.m_steps, request.l_terms, request.commuting
        )
        observed_total = int(request.observed.get("total_calls", -1))
        observed_f = int(request.observed.get("F_H_element", {}).get("calls", 0))
        match = (
            observed_total == prediction.total_calls
            and observed_f == prediction.f_element_calls
        )
        return schemas.LedgerResponse(
            method=request.method,
            m_steps=request.m_steps,
            l_terms=request.l_terms,
            commuting=request.commuting,
            prediction=prediction,
            observed_total_calls=observed_total,
            observed=request.observed,
            match=match,
        )

    return app
