"""High-level solve entry points: one pooled island, or each microgrid on
its own with its own islanding constraint."""

from __future__ import annotations

from .. import uncertainty as unc
from ..milp import backend
from ..models import FleetSpec
from .build import (
    battery_res_dn_cap,
    battery_res_up_cap,
    build_milp,
    decode_solution,
    unit_res_dn_cap,
    unit_res_up_cap,
)
from .schedule import Schedule


class InfeasibleError(RuntimeError):
    """The scheduling problem has no feasible solution. ``hint`` points at
    periods whose PSI target is out of reach even with every reserve maxed."""

    def __init__(self, message: str, hint: str = ""):
        super().__init__(message + (f" ({hint})" if hint else ""))
        self.hint = hint


class SolveError(RuntimeError):
    pass


def solve_schedule(
    fleet: FleetSpec,
    gap: float = 1e-3,
    time_limit: float | None = None,
    pwl: unc.PwlCdf | None = None,
    solver_backend: str | None = None,
    mode_label: str = "networked",
) -> Schedule:
    """Solve the fleet as a single island (a one-microgrid fleet gives the
    individual problem). Raises InfeasibleError / SolveError on failure."""
    if fleet.mode == "independent" and fleet.n_microgrids > 1:
        raise ValueError(
            "fleet is marked independent with several microgrids; use solve_independent_set"
        )
    if pwl is None:
        pwl = unc.build_pwl_cdf()
    model, info = build_milp(fleet, pwl)
    solution = backend.solve(model, rel_gap=gap, time_limit=time_limit, backend=solver_backend)
    if solution.status == "infeasible":
        raise InfeasibleError("schedule is infeasible", _infeasibility_hint(fleet, pwl))
    if not solution.ok:
        raise SolveError(f"solver failed: {solution.status}: {solution.message}")
    assert solution.values is not None and solution.objective is not None
    return decode_solution(
        info,
        solution.values,
        solution.objective,
        solution.gap or 0.0,
        solution.status,
        solution.solve_seconds,
        mode_label,
    )


def single_microgrid_fleet(fleet: FleetSpec, mg_id: str) -> FleetSpec:
    """Slice one microgrid out as its own fleet; cross-microgrid correlation
    is irrelevant to a marginal single-microgrid distribution."""
    mg = fleet.microgrid(mg_id)
    res = unc.resolve_uncertainty(fleet)
    n = res.mg_index(mg_id)
    u = fleet.uncertainty
    sub_uncertainty = u.model_copy(
        update={
            "wind_sigma": _slice_sigma(u.wind_sigma, res.sigma["wind"][n], mg_id),
            "pv_sigma": _slice_sigma(u.pv_sigma, res.sigma["pv"][n], mg_id),
            "demand_sigma": _slice_sigma(u.demand_sigma, res.sigma["demand"][n], mg_id),
            "wind_mean": _slice_mean(res.mean["wind"][n], mg_id),
            "pv_mean": _slice_mean(res.mean["pv"][n], mg_id),
            "demand_mean": _slice_mean(res.mean["demand"][n], mg_id),
            "corr_wind": None,
            "corr_pv": None,
            "corr_demand": None,
        }
    )
    return fleet.model_copy(
        update={"microgrids": [mg], "uncertainty": sub_uncertainty, "mode": "independent"}
    )


def _slice_sigma(spec, row, mg_id: str):
    from ..models import SourceSigma

    if spec.fraction is not None or spec.value is not None:
        return spec
    return SourceSigma(series={mg_id: [float(x) for x in row]})


def _slice_mean(row, mg_id: str):
    from ..models import SourceMean

    if not any(row):
        return None
    return SourceMean(series={mg_id: [float(x) for x in row]})


def solve_independent_set(
    fleet: FleetSpec,
    gap: float = 1e-3,
    time_limit: float | None = None,
    pwl: unc.PwlCdf | None = None,
    solver_backend: str | None = None,
) -> tuple[list[Schedule], float]:
    """Solve every microgrid in isolation, each with its own PSI constraint.
    Returns the per-microgrid schedules and the summed total cost."""
    if pwl is None:
        pwl = unc.build_pwl_cdf()
    schedules: list[Schedule] = []
    for mg in fleet.microgrids:
        sub = single_microgrid_fleet(fleet, mg.id)
        try:
            schedules.append(
                solve_schedule(
                    sub, gap=gap, time_limit=time_limit, pwl=pwl,
                    solver_backend=solver_backend, mode_label="independent",
                )
            )
        except (InfeasibleError, SolveError) as exc:
            raise type(exc)(f"microgrid {mg.id!r}: {exc}") from exc
    total = sum(s.cost.total for s in schedules)
    return schedules, total


def _infeasibility_hint(fleet: FleetSpec, pwl: unc.PwlCdf) -> str:
    """Name the periods whose PSI requirement cannot be met even with every
    reserve at its cap and no PCC exchange."""
    if fleet.psi_req <= 0:
        return ""
    tau = fleet.tau
    ru_cap = rd_cap = 0.0
    for mg in fleet.microgrids:
        ru_cap += sum(unit_res_up_cap(u, tau) for u in mg.units)
        ru_cap += sum(battery_res_up_cap(b, tau) for b in mg.batteries)
        rd_cap += sum(unit_res_dn_cap(u, tau) for u in mg.units)
        rd_cap += sum(battery_res_dn_cap(b, tau) for b in mg.batteries)
    dist = unc.net_error_distribution(fleet, mode="networked")
    hopeless = []
    for t in range(fleet.n_periods):
        best = unc.psi_pwl(pwl, ru_cap, rd_cap, 0.0, float(dist.mu[t]), float(dist.sigma[t]))
        if best < fleet.psi_req:
            hopeless.append((t, best))
    if not hopeless:
        return ""
    listing = ", ".join(f"t={t} max linearized PSI {p:.4f}" for t, p in hopeless[:8])
    return (
        f"PSI target {fleet.psi_req} is unreachable in {len(hopeless)} period(s) even with "
        f"all reserves at their caps and zero PCC exchange: {listing}"
    )
