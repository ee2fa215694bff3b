"""Request and response models for the scheduling service.

Fleet configuration travels as the raw JSON object (the same document the
config files hold); the service validates it with the exact code path the
loader uses, so API callers and file users see identical error messages.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field

from ..scheduler.schedule import Schedule
from ..validation import ValidationReport


class HealthResponse(BaseModel):
    status: str
    version: str
    backend: str


class ValidateRequest(BaseModel):
    config: dict[str, Any]


class ValidateResponse(BaseModel):
    valid: bool
    violations: list[str]


class SolveRequest(BaseModel):
    config: dict[str, Any]
    mode: Literal["independent", "networked"] | None = None  # overrides config
    gap: float = Field(default=1e-3, ge=0)
    time_limit: float | None = Field(default=None, gt=0)
    n_segments: int = Field(default=32, ge=2)
    z_max: float = Field(default=4.0, gt=0)
    validate_psi: bool = True
    samples: int = Field(default=10_000, ge=1)
    seed: int = 20240601


class PeriodPsiModel(BaseModel):
    t: int
    model_psi: float
    exact_psi: float
    empirical_psi: float
    ci_halfwidth: float
    passed: bool


class ValidationModel(BaseModel):
    periods: list[PeriodPsiModel]
    sample_count: int
    seed: int
    min_empirical_psi: float
    min_exact_psi: float
    min_model_psi: float
    audit_passed: bool
    passed: bool

    @classmethod
    def from_report(cls, report: ValidationReport) -> "ValidationModel":
        return cls(
            periods=[
                PeriodPsiModel(
                    t=p.t,
                    model_psi=p.model_psi,
                    exact_psi=p.exact_psi,
                    empirical_psi=p.empirical_psi,
                    ci_halfwidth=p.ci_halfwidth,
                    passed=p.passed,
                )
                for p in report.periods
            ],
            sample_count=report.sample_count,
            seed=report.seed,
            min_empirical_psi=report.min_empirical_psi,
            min_exact_psi=report.min_exact_psi,
            min_model_psi=report.min_model_psi,
            audit_passed=report.audit_passed,
            passed=report.passed,
        )


class SolveResponse(BaseModel):
    status: Literal["ok", "infeasible"]
    mode: str
    detail: str = ""
    schedules: list[Schedule] = Field(default_factory=list)
    total_cost: float | None = None
    validations: list[ValidationModel] = Field(default_factory=list)


class SweepRequest(BaseModel):
    config: dict[str, Any]
    grid: list[float]
    gap: float = Field(default=1e-3, ge=0)
    time_limit: float | None = Field(default=None, gt=0)
    samples: int = Field(default=10_000, ge=1)
    seed: int = 20240601
    jobs: int = Field(default=1, ge=1)


class SweepPointModel(BaseModel):
    axis: float
    status: str
    networked_cost: float | None
    independent_cost: float | None
    min_model_psi: float | None
    min_exact_psi: float | None
    min_empirical_psi: float | None
    min_empirical_psi_independent: float | None
    networked_seconds: float
    independent_seconds: float


class SweepResponse(BaseModel):
    axis_name: str
    points: list[SweepPointModel]


class ExportMpsRequest(BaseModel):
    config: dict[str, Any]
    mode: Literal["independent", "networked"] | None = None
    n_segments: int = Field(default=32, ge=2)
    z_max: float = Field(default=4.0, gt=0)


class ExportMpsResponse(BaseModel):
    mps: str
    name_map: dict[str, Any]
    n_variables: int
    n_constraints: int
    n_binaries: int
