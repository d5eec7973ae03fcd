"""Pydantic schemas for experiment files, service requests, and result records.

The experiment file is a JSON document; unknown keys are rejected and every
numeric range is enforced here or when the plan is assembled, before any
computation starts.  The same models back the HTTP service, so the CLI and
the service validate identically.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TermModel(StrictModel):
    i: int = Field(ge=0)
    j: int = Field(ge=1)
    p: float = Field(ge=0)
    c: Literal[1, -1]


class InstanceModel(StrictModel):
    n: int = Field(ge=2, le=12)
    terms: list[TermModel] = Field(min_length=1)
    a: float = Field(ge=0)
    b: float = Field(ge=0)
    f: float = Field(ge=1)
    witness: list[tuple[float, float]] | None = None

    @model_validator(mode="after")
    def _check_terms(self):
        total = sum(t.p for t in self.terms)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"term weights sum to {total}, must be 1 within 1e-9")
        pairs = [(t.i, t.j) for t in self.terms]
        if len(set(pairs)) != len(pairs):
            raise ValueError("duplicate (i, j) pairs")
        for t in self.terms:
            if not t.i < t.j < self.n:
                raise ValueError(f"term ({t.i}, {t.j}) violates 0 <= i < j < n")
        gap = self.b - self.a
        if gap > 1.0 + 1e-12 or gap < 1.0 / self.f - 1e-12:
            raise ValueError(f"need 1 >= b - a >= 1/f, got b - a = {gap} with f = {self.f}")
        if self.witness is not None and len(self.witness) != 2**self.n:
            raise ValueError(f"witness needs {2**self.n} amplitudes, got {len(self.witness)}")
        return self


ADVERSARY_VARIANTS = (
    "Honest",
    "WrongWitness",
    "RandomOutcomes",
    "VacuumForge",
    "FixedStateReplace",
    "SinglePhotonChannel",
)


class AdversaryModel(StrictModel):
    variant: Literal[ADVERSARY_VARIANTS] = "Honest"
    # WrongWitness: the state the prover teleports instead of the witness
    state: list[tuple[float, float]] | None = None
    # VacuumForge: how the reported counts are forged
    strategy: Literal["greedy", "exclude_all"] = "greedy"
    # FixedStateReplace: single-qubit density matrix, row-major [[re, im], ...];
    # omitted means the maximally mixed qubit
    qubit_state: list[list[tuple[float, float]]] | None = None
    # SinglePhotonChannel: depolarizing strength
    strength: float | None = Field(default=None, ge=0, le=1)

    @model_validator(mode="after")
    def _check_params(self):
        if self.variant == "WrongWitness" and self.state is None:
            raise ValueError("WrongWitness requires a state")
        if self.variant == "SinglePhotonChannel" and self.strength is None:
            raise ValueError("SinglePhotonChannel requires a strength in [0, 1]")
        if self.qubit_state is not None and (
            len(self.qubit_state) != 2 or any(len(row) != 2 for row in self.qubit_state)
        ):
            raise ValueError("qubit_state must be a 2x2 matrix of [re, im] entries")
        return self


class OutputModel(StrictModel):
    directory: str = "."
    transcripts: str = "transcripts.jsonl"
    summary: str = "summary.csv"
    max_transcripts: int | None = Field(default=1000, ge=0)


class ExperimentModel(StrictModel):
    protocol: Literal["p1", "p2"]
    instance: InstanceModel | str
    adversary: AdversaryModel = Field(default_factory=AdversaryModel)
    trials: int = Field(ge=100)
    seed: int = Field(ge=0, lt=2**64)
    m: int | None = Field(default=None, ge=8)
    alpha: float | None = Field(default=None, gt=0, le=1)
    f: float | None = Field(default=None, ge=1)
    output: OutputModel = Field(default_factory=OutputModel)

    @model_validator(mode="after")
    def _check_protocol(self):
        if self.protocol == "p2":
            if self.trials < 1000:
                raise ValueError("p2 estimation needs trials >= 1000")
            if self.m is not None and self.alpha is not None:
                lo = (8.0 / self.m) ** 0.25
                if not lo <= self.alpha <= 1.0:
                    raise ValueError(
                        f"alpha must satisfy (8/m)^(1/4) = {lo:.6f} <= alpha <= 1, got {self.alpha}"
                    )
        elif self.adversary.variant == "VacuumForge":
            raise ValueError("VacuumForge forges photon counts and only applies to p2")
        return self


class RunResult(StrictModel):
    config_hash: str
    protocol: Literal["p1", "p2"]
    adversary: str
    trials: int
    accepts: int
    estimate: float
    ci: float
    bound: float | None
    bound_kind: str
    bound_check: Literal["pass", "fail", "n/a"]


class BoundsResult(StrictModel):
    n: int
    f: float
    alpha: float
    m: int
    gap_lower_bound: float
    honest_reject_bound: float
    threshold_value: float


class PhaseRandRow(StrictModel):
    m: int
    N: int
    f: float
    R: int
    F_series: float
    F_min: float
    shift_bound: float


class SelftestCheck(StrictModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestResult(StrictModel):
    passed: bool
    first_failure: str | None
    checks: list[SelftestCheck]
