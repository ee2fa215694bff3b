"""FastAPI application exposing the scheduling engine.

The service is stateless: every request carries its fleet configuration and
gets back schedules, validation reports, sweep tables or an MPS export.
Domain errors map to 400 with the violation list; an infeasible model is a
normal 200 response with status "infeasible" so clients can distinguish it
from misuse.
"""

from __future__ import annotations

import os
from importlib.metadata import PackageNotFoundError, version

from fastapi import FastAPI, HTTPException

from .. import experiments
from .. import uncertainty as unc
from ..fleet_io import FleetConfigError, fleet_from_dict, validate_fleet
from ..milp.backend import DEFAULT_BACKEND, ENV_BACKEND
from ..milp.mps import render_mps
from ..models import FleetSpec
from ..scheduler import (
    BuildError,
    InfeasibleError,
    SolveError,
    build_milp,
    solve_independent_set,
    solve_schedule,
)
from ..validation import estimate_psi
from .schemas import (
    ExportMpsRequest,
    ExportMpsResponse,
    HealthResponse,
    SolveRequest,
    SolveResponse,
    SweepPointModel,
    SweepRequest,
    SweepResponse,
    ValidateRequest,
    ValidateResponse,
    ValidationModel,
)

try:
    _VERSION = version("islesched")
except PackageNotFoundError:
    _VERSION = "unknown"

app = FastAPI(
    title="islesched",
    version=_VERSION,
    description=(
        "Day-ahead scheduling for single and networked microgrids with a "
        "guaranteed probability of successful islanding."
    ),
)


def _parse_fleet(config: dict, mode: str | None = None) -> FleetSpec:
    try:
        fleet = fleet_from_dict(config)
    except FleetConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    if mode is not None:
        fleet = fleet.model_copy(update={"mode": mode})
    return fleet


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(
        status="ok",
        version=_VERSION,
        backend=os.environ.get(ENV_BACKEND, DEFAULT_BACKEND),
    )


@app.post("/fleet/validate", response_model=ValidateResponse)
def fleet_validate(req: ValidateRequest) -> ValidateResponse:
    try:
        fleet = fleet_from_dict(req.config)
    except FleetConfigError as exc:
        return ValidateResponse(valid=False, violations=exc.violations or [str(exc)])
    return ValidateResponse(valid=True, violations=validate_fleet(fleet))


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    fleet = _parse_fleet(req.config, req.mode)
    try:
        pwl = unc.build_pwl_cdf(req.n_segments, req.z_max)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    try:
        if fleet.mode == "independent" and fleet.n_microgrids > 1:
            schedules, total = solve_independent_set(
                fleet, gap=req.gap, time_limit=req.time_limit, pwl=pwl
            )
        else:
            schedule = solve_schedule(
                fleet, gap=req.gap, time_limit=req.time_limit, pwl=pwl,
                mode_label=fleet.mode,
            )
            schedules, total = [schedule], schedule.cost.total
    except InfeasibleError as exc:
        return SolveResponse(status="infeasible", mode=fleet.mode, detail=str(exc))
    except BuildError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    except SolveError as exc:
        raise HTTPException(status_code=502, detail=str(exc)) from exc
    validations = []
    if req.validate_psi:
        validations = [
            ValidationModel.from_report(
                estimate_psi(s, fleet, n=req.samples, seed=req.seed)
            )
            for s in schedules
        ]
    return SolveResponse(
        status="ok",
        mode=fleet.mode,
        schedules=schedules,
        total_cost=total,
        validations=validations,
    )


def _sweep_response(result: experiments.ExperimentResult) -> SweepResponse:
    return SweepResponse(
        axis_name=result.axis_name,
        points=[SweepPointModel(**vars(p)) for p in result.points],
    )


@app.post("/sweep/psi", response_model=SweepResponse)
def sweep_psi(req: SweepRequest) -> SweepResponse:
    fleet = _parse_fleet(req.config)
    cap = unc.build_pwl_cdf().max_probability_window
    if any(not 0.0 <= q < cap for q in req.grid):
        raise HTTPException(
            status_code=400, detail=f"psi grid values must lie in [0, {cap:.6f})"
        )
    try:
        result = experiments.sweep_psi(
            fleet, req.grid, gap=req.gap, time_limit=req.time_limit,
            samples=req.samples, seed=req.seed, jobs=req.jobs,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return _sweep_response(result)


@app.post("/sweep/corr", response_model=SweepResponse)
def sweep_corr(req: SweepRequest) -> SweepResponse:
    fleet = _parse_fleet(req.config)
    try:
        result = experiments.sweep_corr(
            fleet, req.grid, gap=req.gap, time_limit=req.time_limit,
            samples=req.samples, seed=req.seed, jobs=req.jobs,
        )
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return _sweep_response(result)


@app.post("/export/mps", response_model=ExportMpsResponse)
def export_mps(req: ExportMpsRequest) -> ExportMpsResponse:
    fleet = _parse_fleet(req.config, req.mode)
    if fleet.mode == "independent" and fleet.n_microgrids > 1:
        raise HTTPException(
            status_code=400,
            detail="independent-mode export needs a single-microgrid config; "
            "export each microgrid separately",
        )
    try:
        pwl = unc.build_pwl_cdf(req.n_segments, req.z_max)
        model, _ = build_milp(fleet, pwl)
    except (ValueError, BuildError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    text, mapping = render_mps(model)
    return ExportMpsResponse(
        mps=text,
        name_map=mapping,
        n_variables=model.n_variables,
        n_constraints=model.n_constraints,
        n_binaries=model.n_binaries,
    )
