"""Request/response models of the experiment service.

Unknown fields are rejected everywhere.  Noise bounds use ``None`` on the
wire for "unbounded" so payloads stay valid JSON.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ObjectiveInfo(BaseModel):
    name: str
    dimension: int
    lipschitz_constant: float
    norm: str
    known_minimum: Optional[float] = None
    analytic_argmin: Optional[list[float]] = None
    notes: str = ""


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    objective: str
    dims: Optional[int] = None
    budget: Optional[int] = Field(default=None, ge=1)
    budgets: Optional[list[int]] = None
    optimizer: Literal["ps", "grid"] = "ps"
    horizon: Literal["known", "unknown"] = "known"
    noise_bounds: Optional[list[Optional[float]]] = None
    oracle_resolution: int = Field(default=4096, ge=2)
    include_envelope: bool = False

    @model_validator(mode="after")
    def _check_budget_choice(self) -> "RunRequest":
        if self.budget is None and not self.budgets:
            raise ValueError("one of budget or budgets is required")
        if self.budget is not None and self.budgets:
            raise ValueError("budget and budgets are mutually exclusive")
        if self.horizon == "unknown" and self.budget is None:
            raise ValueError("unknown-horizon runs take a total budget, not budgets")
        return self


class EvalRecordModel(BaseModel):
    t: int
    tau: list[int]
    x: list[float]
    f: float


class EpochRunModel(BaseModel):
    epoch_index: int
    epoch_length: int
    budgets: list[int]
    records: list[EvalRecordModel]


class BoundCheckModel(BaseModel):
    name: str
    bound: float
    measured: float
    satisfied: bool


class RegretReportModel(BaseModel):
    average_regret: float
    average_pseudo_regret: float
    cumulative_regret: float
    noise_gap: Optional[float] = None
    f_star: float
    f_star_error: float
    f_star_source: str
    total_evaluations: int
    bound_checks: list[BoundCheckModel] = []


class RunResponse(BaseModel):
    objective: str
    dimension: int
    optimizer: str
    horizon: str
    noise_bounds: list[Optional[float]]
    epochs: list[EpochRunModel]
    report: RegretReportModel
    envelope: Optional[list[tuple[float, float]]] = None


class AuditRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    objective: str
    dims: Optional[int] = None
    budget: Optional[int] = Field(default=None, ge=1)
    budgets: Optional[list[int]] = None
    optimizer: Literal["ps", "grid"] = "ps"
    horizon: Literal["known", "unknown"] = "known"
    noise_bounds: Optional[list[Optional[float]]] = None
    oracle_resolution: int = Field(default=4096, ge=2)
    records: Optional[list[EvalRecordModel]] = None
    split: int = Field(default=1, ge=1)
    robustness_epsilon: float = Field(default=0.1, ge=0.0)
    conditional_oracle: Literal["auto", "grid"] = "auto"
    include_trend: bool = True
    trend_budgets: list[int] = [4, 16, 64, 256]

    @model_validator(mode="after")
    def _check_source(self) -> "AuditRequest":
        if self.records is None:
            if self.budget is None and not self.budgets:
                raise ValueError("audit of a fresh run needs budget or budgets")
            if self.budget is not None and self.budgets:
                raise ValueError("budget and budgets are mutually exclusive")
            if self.horizon == "unknown" and self.budget is None:
                raise ValueError("unknown-horizon runs take a total budget")
        return self


class DecompositionModel(BaseModel):
    bound_name: str
    split: int
    lhs: float
    rhs: float
    inner_term: float
    outer_term: float
    margin: float
    oracle_error: float
    verdict: Literal["holds", "violated", "inconclusive"]


class RobustnessModel(BaseModel):
    horizon: int
    epsilon: float
    alpha: float
    beta: float
    base_regret: float
    degenerate: bool


class TrendModel(BaseModel):
    budgets: list[int]
    average_regret: list[float]
    nonincreasing: bool


class AuditResponse(BaseModel):
    objective: str
    dimension: int
    budgets: list[int]
    total_evaluations: int
    report: RegretReportModel
    decomposition: Optional[DecompositionModel] = None
    robustness: RobustnessModel
    trend: Optional[TrendModel] = None


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    objective: str
    t_values: list[int] = Field(min_length=1)
    optimizer: Literal["ps", "grid"] = "ps"
    oracle_resolution: int = Field(default=4096, ge=2)
    robustness_epsilon: float = Field(default=0.1, ge=0.0)


class SweepRowModel(BaseModel):
    T: int
    budgets: list[int]
    r: float
    r_tilde: float
    R: float
    bound_strong: float
    bound_weak: float


class SweepResponse(BaseModel):
    objective: str
    rows: list[SweepRowModel]


class HealthResponse(BaseModel):
    status: str
