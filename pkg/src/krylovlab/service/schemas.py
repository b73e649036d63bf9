"""Request/response models for the HTTP surface.

Every request model forbids unknown fields, so a typo in a config key is a
validation error rather than a silently ignored default. Responses carry
the fully resolved request back to the client: output files must embed the
exact configuration that produced them.
"""

from __future__ import annotations

import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianSpec(StrictModel):
    family: Literal["tfim", "heisenberg_xxz", "file"]
    n_qubits: int = 0
    coupling: float = 1.0
    field: float = 1.0
    delta: float = 1.0
    text: str = ""

    @model_validator(mode="after")
    def _check(self):
        if self.family == "file":
            if not self.text:
                raise ValueError("family 'file' needs the Hamiltonian text inline")
        elif self.n_qubits < 1:
            raise ValueError(f"family {self.family!r} needs a positive n_qubits")
        return self


class StateSpec(StrictModel):
    kind: Literal["hartree_fock", "basis", "plus", "singlet"] = "hartree_fock"
    occupied: int = 0
    bits: str = ""
    pattern_a: str = ""
    pattern_b: str = ""

    @model_validator(mode="after")
    def _check(self):
        if self.kind == "basis" and not self.bits:
            raise ValueError("basis state needs 'bits'")
        if self.kind == "singlet" and not (self.pattern_a and self.pattern_b):
            raise ValueError("singlet state needs 'pattern_a' and 'pattern_b'")
        return self


class ShotSpec(StrictModel):
    mode: Literal["exact", "sampled"] = "exact"
    shots: int = 0

    @model_validator(mode="after")
    def _check(self):
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs a positive shot count")
        return self


class RunSettings(StrictModel):
    method: Literal["KDM_H", "KDM_U", "FDM_H", "FDM_U"] = "KDM_U"
    tau: float = Field(default=0.1, gt=0)
    m_max: int = Field(default=8, ge=1)
    window_min: float | None = None
    window_max: float | None = None
    window_preset: Literal["narrow", "wide"] | None = None
    j: int | None = Field(default=None, ge=1)
    dft_grid: bool = False
    estimator: Literal["direct", "hadamard", "mfe"] = "direct"
    three_phase: bool = True
    svd_threshold: float | None = Field(default=None, gt=0, lt=1)
    shift_policy: Literal["none", "hf", "mid_spectrum"] = "mid_spectrum"
    branch: int = 0
    seed: int = 0
    stop_variance: float = 1e-8
    commuting: bool = True

    @model_validator(mode="after")
    def _check(self):
        if (self.window_min is None) != (self.window_max is None):
            raise ValueError("window_min and window_max come as a pair")
        if self.window_min is not None and not self.window_min < self.window_max:
            raise ValueError("window needs window_min < window_max")
        return self


class RunRequest(StrictModel):
    hamiltonian: HamiltonianSpec
    state: StateSpec = Field(default_factory=StateSpec)
    run: RunSettings = Field(default_factory=RunSettings)
    shots: ShotSpec = Field(default_factory=ShotSpec)


def clean_float(value: float | None) -> float | None:
    if value is None or not math.isfinite(value):
        return None
    return float(value)


class TraceRow(StrictModel):
    step: int
    energy: float | None
    delta_e: float | None
    kappa: float | None
    kappa_flagged: bool
    variance: float | None
    retained_rank: int
    calls: int
    shots: int
    ok: bool
    message: str = ""

    @classmethod
    def from_step(cls, row) -> "TraceRow":
        return cls(
            step=row.step,
            energy=clean_float(row.energy),
            delta_e=clean_float(row.delta_e),
            kappa=clean_float(row.kappa),
            kappa_flagged=row.kappa_flagged,
            variance=clean_float(row.variance),
            retained_rank=row.retained_rank,
            calls=row.calls,
            shots=row.shots,
            ok=row.ok,
            message=row.message,
        )


class RunResponse(StrictModel):
    resolved: RunRequest
    n_qubits: int
    l_terms: int
    method: str
    oracle_ground_energy: float
    shift: float
    stopped_early: bool
    rows: list[TraceRow]
    ledger: dict


class SweepAxis(StrictModel):
    parameter: Literal[
        "hamiltonian.coupling", "hamiltonian.field", "hamiltonian.delta", "run.tau"
    ]
    values: list[float] = Field(min_length=1)


class SweepRequest(StrictModel):
    base: RunRequest
    axis: SweepAxis


class SweepRow(StrictModel):
    value: float
    ok: bool
    steps: int = 0
    energy: float | None = None
    delta_e: float | None = None
    kappa: float | None = None
    variance: float | None = None
    calls: int = 0
    shots: int = 0
    message: str = ""


class SweepResponse(StrictModel):
    resolved: SweepRequest
    rows: list[SweepRow]


class HyperoptRequest(StrictModel):
    base: RunRequest
    windows: list[tuple[float, float]] = Field(default_factory=list)
    window_presets: list[Literal["narrow", "wide"]] = Field(default_factory=list)
    j_values: list[int] = Field(min_length=1)

    @model_validator(mode="after")
    def _check(self):
        if not self.windows and not self.window_presets:
            raise ValueError("need at least one window or window preset")
        for lo, hi in self.windows:
            if not lo < hi:
                raise ValueError(f"window ({lo}, {hi}) needs lower < upper")
        return self


class HyperoptRow(StrictModel):
    e_min: float
    e_max: float
    j: int
    variance: float | None
    energy: float | None
    ok: bool
    message: str = ""


class HyperoptResponse(StrictModel):
    resolved: HyperoptRequest
    best: HyperoptRow
    table: list[HyperoptRow]
    ledger: dict


class SpectrumRequest(StrictModel):
    hamiltonian: HamiltonianSpec
    max_eigenvalues: int | None = Field(default=None, ge=1)


class SpectrumResponse(StrictModel):
    n_qubits: int
    l_terms: int
    ground_energy: float
    eigenvalues: list[float]


class LedgerRequest(StrictModel):
    method: Literal["KDM_H", "KDM_U", "FDM_H", "FDM_U"]
    m_steps: int = Field(ge=1)
    l_terms: int = Field(ge=1)
    commuting: bool = True
    observed: dict


class LedgerPrediction(StrictModel):
    formula: str
    overlap_calls: int
    f_element_calls: int
    total_calls: int


class LedgerResponse(StrictModel):
    method: str
    m_steps: int
    l_terms: int
    commuting: bool
    prediction: LedgerPrediction
    observed_total_calls: int
    observed: dict
    match: bool


class HealthResponse(StrictModel):
    status: str
    cached_propagators: int
