"""Translate a fleet into the chance-constrained scheduling MILP.

The builder always produces one pooled island over every microgrid in the
fleet it is given: a single energy balance and a single islanding-probability
constraint per period, with per-microgrid PCC variables and bounds. Solving
a microgrid independently is done by handing the builder a one-microgrid
fleet (see ``solve.py``).

Formulation per period:

* generator offer blocks with commitment forcing, startup charges as
  nonnegative epigraph variables, standard three-window minimum up/down
  constraints honoring initial conditions;
* reserve caps from committed headroom and from ramp capability over the
  reserve delivery time tau;
* battery charge/discharge with mode exclusivity, SOC recursion with
  efficiencies, and reserves capped by both power headroom and the energy
  actually stored (discharge side) or storable (charge side) within tau;
* one energy balance over the island;
* the islanding chance constraint: the reserve window endpoints are mapped
  to z-scores of the net-error distribution, pushed through an
  interval-selection piecewise-linear model of the normal CDF, and the
  resulting probability is required to meet the target. Periods with
  (near-)zero sigma instead force the error mean inside the window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import uncertainty as unc
from ..milp.model import MilpModel
from ..models import BatterySpec, DispatchableUnit, FleetSpec, MicrogridSpec
from .schedule import (
    BatterySchedule,
    CostBreakdown,
    MicrogridSchedule,
    Schedule,
    UnitSchedule,
    compute_cost_breakdown,
)


class BuildError(ValueError):
    pass


# -- variable naming, shared by builder and decoder --------------------------

def v_commit(mg: str, u: str, t: int) -> str:
    return f"u[{mg},{u},{t}]"

def v_block(mg: str, u: str, t: int, m: int) -> str:
    return f"p[{mg},{u},{t},{m}]"

def v_power(mg: str, u: str, t: int) -> str:
    return f"P[{mg},{u},{t}]"

def v_startup(mg: str, u: str, t: int) -> str:
    return f"su[{mg},{u},{t}]"

def v_res_up(mg: str, u: str, t: int) -> str:
    return f"ru[{mg},{u},{t}]"

def v_res_dn(mg: str, u: str, t: int) -> str:
    return f"rd[{mg},{u},{t}]"

def v_charge_on(mg: str, b: str, t: int) -> str:
    return f"uc[{mg},{b},{t}]"

def v_discharge_on(mg: str, b: str, t: int) -> str:
    return f"ud[{mg},{b},{t}]"

def v_charge(mg: str, b: str, t: int) -> str:
    return f"pc[{mg},{b},{t}]"

def v_discharge(mg: str, b: str, t: int) -> str:
    return f"pd[{mg},{b},{t}]"

def v_bat_power(mg: str, b: str, t: int) -> str:
    return f"pb[{mg},{b},{t}]"

def v_soc(mg: str, b: str, t: int) -> str:
    return f"soc[{mg},{b},{t}]"

def v_bat_res_up(mg: str, b: str, t: int) -> str:
    return f"rub[{mg},{b},{t}]"

def v_bat_res_dn(mg: str, b: str, t: int) -> str:
    return f"rdb[{mg},{b},{t}]"

def v_pcc(mg: str, t: int) -> str:
    return f"pcc[{mg},{t}]"

def v_z(side: str, t: int) -> str:
    return f"z{side}[{t}]"

def v_seg(side: str, t: int, l: int) -> str:
    return f"b{side}[{t},{l}]"

def v_pos(side: str, t: int, l: int) -> str:
    return f"w{side}[{t},{l}]"

def v_cdf(side: str, t: int) -> str:
    return f"cdf{side}[{t}]"

def v_psi(t: int) -> str:
    return f"psi[{t}]"


def unit_res_up_cap(u: DispatchableUnit, tau: float) -> float:
    return min(u.p_max - u.p_min, u.ramp_up_rate * tau)

def unit_res_dn_cap(u: DispatchableUnit, tau: float) -> float:
    return min(u.p_max - u.p_min, u.ramp_down_rate * tau)

def battery_res_up_cap(b: BatterySpec, tau: float) -> float:
    return min(b.p_discharge_max + b.p_charge_max, b.eta_d * (b.soc_max - b.soc_min) / tau)

def battery_res_dn_cap(b: BatterySpec, tau: float) -> float:
    return min(b.p_charge_max + b.p_discharge_max, (b.soc_max - b.soc_min) / (b.eta_c * tau))


@dataclass(frozen=True)
class PwlInterval:
    """One selectable interval of the linearized CDF: on [lo, hi] the chord
    value is intercept + slope * z. Clamp intervals carry slope 0."""

    lo: float
    hi: float
    slope: float
    intercept: float


def pwl_intervals(pwl: unc.PwlCdf, z_big: float) -> list[PwlInterval]:
    """Interior chord intervals plus the two clamped tails, with the tails
    extended to +-z_big (which must cover every reachable z)."""
    bps, vals, slopes = pwl.breakpoints, pwl.values, pwl.slopes
    out = [PwlInterval(lo=-z_big, hi=float(bps[0]), slope=0.0, intercept=float(vals[0]))]
    for l in range(pwl.n_segments):
        out.append(
            PwlInterval(
                lo=float(bps[l]),
                hi=float(bps[l + 1]),
                slope=float(slopes[l]),
                intercept=float(vals[l] - slopes[l] * bps[l]),
            )
        )
    out.append(PwlInterval(lo=float(bps[-1]), hi=z_big, slope=0.0, intercept=float(vals[-1])))
    return out


@dataclass(frozen=True)
class DecodeInfo:
    """Everything needed to turn a MilpSolution back into a Schedule."""

    fleet: FleetSpec
    pwl: unc.PwlCdf
    mu: np.ndarray
    sigma: np.ndarray
    psi_kind: tuple[str, ...]  # per period: "pwl" | "deterministic" | "off"


def build_milp(fleet: FleetSpec, pwl: unc.PwlCdf | None = None) -> tuple[MilpModel, DecodeInfo]:
    """Build the island MILP for a fleet. Raises BuildError on an empty
    fleet or a PSI requirement the piecewise-linear CDF cannot certify."""
    if pwl is None:
        pwl = unc.build_pwl_cdf()
    if fleet.n_microgrids == 0:
        raise BuildError("fleet has no microgrids")
    if fleet.n_periods == 0:
        raise BuildError("fleet has an empty horizon")
    cap = pwl.max_probability_window
    if fleet.psi_req >= cap:
        raise BuildError(
            f"psi_req {fleet.psi_req} is not representable: the linearized CDF "
            f"with z_max={pwl.z_max:g} caps PSI at {cap:.6f}"
        )

    dist = unc.net_error_distribution(fleet, mode="networked")
    n_t = fleet.n_periods
    model = MilpModel(name="islesched")

    for mg in fleet.microgrids:
        _add_microgrid_vars(model, mg, fleet, n_t)
    for mg in fleet.microgrids:
        _add_unit_constraints(model, mg, fleet, n_t)
        _add_battery_constraints(model, mg, fleet, n_t)
    _add_balance(model, fleet, n_t)

    psi_kind: list[str] = []
    if fleet.psi_req <= 0.0:
        psi_kind = ["off"] * n_t
    else:
        for t in range(n_t):
            sigma_t = float(dist.sigma[t])
            mu_t = float(dist.mu[t])
            if sigma_t < unc.SIGMA_DETERMINISTIC_KW:
                _add_deterministic_window(model, fleet, t, mu_t)
                psi_kind.append("deterministic")
            else:
                _add_psi_block(model, fleet, pwl, t, mu_t, sigma_t)
                psi_kind.append("pwl")

    _set_objective(model, fleet, n_t)
    info = DecodeInfo(
        fleet=fleet, pwl=pwl, mu=dist.mu.copy(), sigma=dist.sigma.copy(),
        psi_kind=tuple(psi_kind),
    )
    return model, info


def _add_microgrid_vars(model: MilpModel, mg: MicrogridSpec, fleet: FleetSpec, n_t: int) -> None:
    tau = fleet.tau
    for u in mg.units:
        span = u.p_max - u.p_min
        for t in range(n_t):
            model.add_binary(v_commit(mg.id, u.id, t))
            for m, blk in enumerate(u.offer_blocks):
                model.add_variable(v_block(mg.id, u.id, t, m), 0.0, blk.width)
            model.add_variable(v_power(mg.id, u.id, t), 0.0, u.p_max)
            model.add_variable(v_startup(mg.id, u.id, t), 0.0, math.inf)
            model.add_variable(v_res_up(mg.id, u.id, t), 0.0, min(span, u.ramp_up_rate * tau))
            model.add_variable(v_res_dn(mg.id, u.id, t), 0.0, min(span, u.ramp_down_rate * tau))
    for b in mg.batteries:
        for t in range(n_t):
            model.add_binary(v_charge_on(mg.id, b.id, t))
            model.add_binary(v_discharge_on(mg.id, b.id, t))
            model.add_variable(v_charge(mg.id, b.id, t), 0.0, b.p_charge_max)
            model.add_variable(v_discharge(mg.id, b.id, t), 0.0, b.p_discharge_max)
            model.add_variable(v_bat_power(mg.id, b.id, t), -b.p_charge_max, b.p_discharge_max)
            soc_lb = b.soc_min
            if t == n_t - 1 and b.soc_terminal_min is not None:
                soc_lb = max(soc_lb, b.soc_terminal_min)
            model.add_variable(v_soc(mg.id, b.id, t), soc_lb, b.soc_max)
            model.add_variable(v_bat_res_up(mg.id, b.id, t), 0.0, battery_res_up_cap(b, tau))
            model.add_variable(v_bat_res_dn(mg.id, b.id, t), 0.0, battery_res_dn_cap(b, tau))
    for t in range(n_t):
        model.add_variable(v_pcc(mg.id, t), -float(mg.pcc_export_max or 0.0),
                           float(mg.pcc_import_max or 0.0))


def _add_unit_constraints(model: MilpModel, mg: MicrogridSpec, fleet: FleetSpec, n_t: int) -> None:
    tau = fleet.tau
    for u in mg.units:
        uid = u.id
        prev_on = 1.0 if u.initially_on else 0.0
        for t in range(n_t):
            cu, cp = v_commit(mg.id, uid, t), v_power(mg.id, uid, t)
            # dispatch = committed minimum + accepted block energy
            coeffs = {cp: 1.0, cu: -u.p_min}
            for m in range(len(u.offer_blocks)):
                coeffs[v_block(mg.id, uid, t, m)] = -1.0
            model.add_constraint(f"block_sum[{mg.id},{uid},{t}]", coeffs, "==", 0.0)
            model.add_constraint(
                f"commit_lo[{mg.id},{uid},{t}]", {cp: 1.0, cu: -u.p_min}, ">=", 0.0
            )
            model.add_constraint(
                f"commit_hi[{mg.id},{uid},{t}]", {cp: 1.0, cu: -u.p_max}, "<=", 0.0
            )
            ru, rd = v_res_up(mg.id, uid, t), v_res_dn(mg.id, uid, t)
            model.add_constraint(
                f"res_up_headroom[{mg.id},{uid},{t}]", {ru: 1.0, cp: 1.0, cu: -u.p_max}, "<=", 0.0
            )
            model.add_constraint(
                f"res_up_ramp[{mg.id},{uid},{t}]", {ru: 1.0, cu: -u.ramp_up_rate * tau}, "<=", 0.0
            )
            model.add_constraint(
                f"res_dn_headroom[{mg.id},{uid},{t}]", {rd: 1.0, cp: -1.0, cu: u.p_min}, "<=", 0.0
            )
            model.add_constraint(
                f"res_dn_ramp[{mg.id},{uid},{t}]", {rd: 1.0, cu: -u.ramp_down_rate * tau}, "<=", 0.0
            )
            # startup charge epigraph: su >= cost * (u_t - u_{t-1})
            su = v_startup(mg.id, uid, t)
            if t == 0:
                model.add_constraint(
                    f"startup[{mg.id},{uid},{t}]",
                    {su: 1.0, cu: -u.startup_cost},
                    ">=",
                    -u.startup_cost * prev_on,
                )
            else:
                model.add_constraint(
                    f"startup[{mg.id},{uid},{t}]",
                    {su: 1.0, cu: -u.startup_cost,
                     v_commit(mg.id, uid, t - 1): u.startup_cost},
                    ">=",
                    0.0,
                )
            if fleet.enable_ramp_limits:
                dt = fleet.dt
                if t == 0:
                    model.add_constraint(
                        f"ramp_up[{mg.id},{uid},{t}]", {cp: 1.0}, "<=",
                        u.initial_power + u.ramp_up_rate * dt,
                    )
                    model.add_constraint(
                        f"ramp_dn[{mg.id},{uid},{t}]", {cp: -1.0}, "<=",
                        -u.initial_power + u.ramp_down_rate * dt,
                    )
                else:
                    prev_p = v_power(mg.id, uid, t - 1)
                    model.add_constraint(
                        f"ramp_up[{mg.id},{uid},{t}]", {cp: 1.0, prev_p: -1.0}, "<=",
                        u.ramp_up_rate * dt,
                    )
                    model.add_constraint(
                        f"ramp_dn[{mg.id},{uid},{t}]", {cp: -1.0, prev_p: 1.0}, "<=",
                        u.ramp_down_rate * dt,
                    )
        _add_min_up_down(model, mg, u, n_t)


def _add_min_up_down(model: MilpModel, mg: MicrogridSpec, u: DispatchableUnit, n_t: int) -> None:
    """Three-window minimum up/down formulation on the commitment variables:
    an initial stretch forced by the boundary condition, rolling full windows
    after each state change, and shrinking windows at the horizon tail.

    Up, window length W starting at t:  sum_{k=t..t+W-1} u_k >= W (u_t - u_{t-1})
    Down:                               sum (1 - u_k)     >= W (u_{t-1} - u_t)
    """
    uid = u.id
    on0 = u.initially_on
    prev = 1.0 if on0 else 0.0

    def commit(t: int) -> str:
        return v_commit(mg.id, uid, t)

    def add_up_row(name: str, t: int, window: int) -> None:
        coeffs = {commit(k): 1.0 for k in range(t, t + window)}
        coeffs[commit(t)] -= window
        rhs = 0.0
        if t == 0:
            rhs = -window * prev
        else:
            coeffs[commit(t - 1)] = coeffs.get(commit(t - 1), 0.0) + window
        model.add_constraint(name, coeffs, ">=", rhs)

    def add_down_row(name: str, t: int, window: int) -> None:
        coeffs = {commit(k): -1.0 for k in range(t, t + window)}
        coeffs[commit(t)] += window
        rhs = -float(window)
        if t == 0:
            rhs += window * prev
        else:
            coeffs[commit(t - 1)] = coeffs.get(commit(t - 1), 0.0) - window
        model.add_constraint(name, coeffs, ">=", rhs)

    if u.min_up > 1 or (on0 and u.min_up > u.initial_on_periods):
        g = min(n_t, max(0, u.min_up - u.initial_on_periods)) if on0 else 0
        if g > 0:
            model.add_constraint(
                f"min_up_init[{mg.id},{uid}]", {commit(t): 1.0 for t in range(g)}, "==", float(g)
            )
        for t in range(g, n_t - u.min_up + 1):
            add_up_row(f"min_up[{mg.id},{uid},{t}]", t, u.min_up)
        for t in range(max(g, n_t - u.min_up + 1), n_t):
            add_up_row(f"min_up_tail[{mg.id},{uid},{t}]", t, n_t - t)

    if u.min_down > 1 or (not on0 and u.min_down > u.initial_off_periods):
        l0 = min(n_t, max(0, u.min_down - u.initial_off_periods)) if not on0 else 0
        if l0 > 0:
            model.add_constraint(
                f"min_down_init[{mg.id},{uid}]", {commit(t): 1.0 for t in range(l0)}, "==", 0.0
            )
        for t in range(l0, n_t - u.min_down + 1):
            add_down_row(f"min_down[{mg.id},{uid},{t}]", t, u.min_down)
        for t in range(max(l0, n_t - u.min_down + 1), n_t):
            add_down_row(f"min_down_tail[{mg.id},{uid},{t}]", t, n_t - t)


def _add_battery_constraints(model: MilpModel, mg: MicrogridSpec, fleet: FleetSpec, n_t: int) -> None:
    dt, tau = fleet.dt, fleet.tau
    for b in mg.batteries:
        bid = b.id
        for t in range(n_t):
            uc, ud = v_charge_on(mg.id, bid, t), v_discharge_on(mg.id, bid, t)
            pc, pd = v_charge(mg.id, bid, t), v_discharge(mg.id, bid, t)
            pb, soc = v_bat_power(mg.id, bid, t), v_soc(mg.id, bid, t)
            model.add_constraint(
                f"charge_cap[{mg.id},{bid},{t}]", {pc: 1.0, uc: -b.p_charge_max}, "<=", 0.0
            )
            model.add_constraint(
                f"discharge_cap[{mg.id},{bid},{t}]", {pd: 1.0, ud: -b.p_discharge_max}, "<=", 0.0
            )
            model.add_constraint(f"charge_xor[{mg.id},{bid},{t}]", {uc: 1.0, ud: 1.0}, "<=", 1.0)
            # SOC recursion with charge/discharge efficiencies
            soc_coeffs = {soc: 1.0, pc: -b.eta_c * dt, pd: dt / b.eta_d}
            if t == 0:
                model.add_constraint(
                    f"soc_balance[{mg.id},{bid},{t}]", soc_coeffs, "==", b.soc_initial
                )
            else:
                soc_coeffs[v_soc(mg.id, bid, t - 1)] = -1.0
                model.add_constraint(f"soc_balance[{mg.id},{bid},{t}]", soc_coeffs, "==", 0.0)
            model.add_constraint(
                f"net_power[{mg.id},{bid},{t}]", {pb: 1.0, pd: -1.0, pc: 1.0}, "==", 0.0
            )
            rub, rdb = v_bat_res_up(mg.id, bid, t), v_bat_res_dn(mg.id, bid, t)
            model.add_constraint(
                f"bat_res_up_power[{mg.id},{bid},{t}]", {rub: 1.0, pb: 1.0}, "<=", b.p_discharge_max
            )
            # up-reserve must be deliverable from stored energy within tau
            k_d = b.eta_d / tau
            model.add_constraint(
                f"bat_res_up_energy[{mg.id},{bid},{t}]", {rub: 1.0, soc: -k_d}, "<=",
                -k_d * b.soc_min,
            )
            model.add_constraint(
                f"bat_res_dn_power[{mg.id},{bid},{t}]", {rdb: 1.0, pb: -1.0}, "<=", b.p_charge_max
            )
            # down-reserve must be absorbable into SOC headroom within tau
            k_c = 1.0 / (b.eta_c * tau)
            model.add_constraint(
                f"bat_res_dn_energy[{mg.id},{bid},{t}]", {rdb: 1.0, soc: k_c}, "<=",
                k_c * b.soc_max,
            )


def _add_balance(model: MilpModel, fleet: FleetSpec, n_t: int) -> None:
    """One energy balance per period over the whole island: dispatchable
    output, renewables, PCC exchange and battery discharge serve demand and
    battery charging."""
    for t in range(n_t):
        coeffs: dict[str, float] = {}
        rhs = 0.0
        for mg in fleet.microgrids:
            for u in mg.units:
                coeffs[v_power(mg.id, u.id, t)] = 1.0
            for b in mg.batteries:
                coeffs[v_discharge(mg.id, b.id, t)] = 1.0
                coeffs[v_charge(mg.id, b.id, t)] = -1.0
            coeffs[v_pcc(mg.id, t)] = 1.0
            rhs += mg.demand_forecast[t] - mg.wind_forecast[t] - mg.pv_forecast[t]
        model.add_constraint(f"balance[{t}]", coeffs, "==", rhs)


def _reserve_window_terms(fleet: FleetSpec, t: int) -> tuple[dict[str, float], dict[str, float]]:
    """Coefficient dictionaries for the window endpoints:
    upper = total up-reserve - total PCC, lower = -total down-reserve - total PCC."""
    up: dict[str, float] = {}
    dn: dict[str, float] = {}
    for mg in fleet.microgrids:
        for u in mg.units:
            up[v_res_up(mg.id, u.id, t)] = 1.0
            dn[v_res_dn(mg.id, u.id, t)] = -1.0
        for b in mg.batteries:
            up[v_bat_res_up(mg.id, b.id, t)] = 1.0
            dn[v_bat_res_dn(mg.id, b.id, t)] = -1.0
        up[v_pcc(mg.id, t)] = -1.0
        dn[v_pcc(mg.id, t)] = -1.0
    return up, dn


def _fleet_reserve_caps(fleet: FleetSpec) -> tuple[float, float, float, float]:
    """Fleet-wide reserve capability and PCC range, for z-variable bounds."""
    tau = fleet.tau
    ru_cap = rd_cap = imp = exp = 0.0
    for mg in fleet.microgrids:
        ru_cap += sum(unit_res_up_cap(u, tau) for u in mg.units)
        ru_cap += sum(battery_res_up_cap(b, tau) for b in mg.batteries)
        rd_cap += sum(unit_res_dn_cap(u, tau) for u in mg.units)
        rd_cap += sum(battery_res_dn_cap(b, tau) for b in mg.batteries)
        imp += float(mg.pcc_import_max or 0.0)
        exp += float(mg.pcc_export_max or 0.0)
    return ru_cap, rd_cap, imp, exp


def _add_deterministic_window(model: MilpModel, fleet: FleetSpec, t: int, mu_t: float) -> None:
    """Zero-sigma periods: the (deterministic) net error must land inside the
    reserve window, replacing the probabilistic constraint."""
    up, dn = _reserve_window_terms(fleet, t)
    model.add_constraint(f"det_window_up[{t}]", up, ">=", mu_t)
    model.add_constraint(f"det_window_dn[{t}]", dn, "<=", mu_t)


def _add_psi_block(
    model: MilpModel,
    fleet: FleetSpec,
    pwl: unc.PwlCdf,
    t: int,
    mu_t: float,
    sigma_t: float,
) -> None:
    """Linearized chance constraint for one period.

    The window endpoints are expressed as z-scores, each z is located in
    exactly one interval of the piecewise-linear CDF via selection binaries,
    a position variable per interval carries the within-interval coordinate,
    and the CDF value is the selected interval's affine function of that
    position. The certified probability is the difference of the two CDF
    values.
    """
    ru_cap, rd_cap, imp, exp = _fleet_reserve_caps(fleet)
    # reachable z ranges from reserve capability and PCC bounds
    zu_lo = (0.0 - imp - mu_t) / sigma_t
    zu_hi = (ru_cap + exp - mu_t) / sigma_t
    zl_lo = (-rd_cap - imp - mu_t) / sigma_t
    zl_hi = (0.0 + exp - mu_t) / sigma_t
    z_big = pwl.z_max + max(abs(zu_lo), abs(zu_hi), abs(zl_lo), abs(zl_hi))
    intervals = pwl_intervals(pwl, z_big)

    model.add_variable(v_z("u", t), zu_lo, zu_hi)
    model.add_variable(v_z("l", t), zl_lo, zl_hi)

    up, dn = _reserve_window_terms(fleet, t)
    up[v_z("u", t)] = -sigma_t
    model.add_constraint(f"z_up_def[{t}]", up, "==", mu_t)
    dn[v_z("l", t)] = -sigma_t
    model.add_constraint(f"z_dn_def[{t}]", dn, "==", mu_t)

    for side in ("u", "l"):
        pick: dict[str, float] = {}
        pos_sum: dict[str, float] = {v_z(side, t): -1.0}
        cdf_def: dict[str, float] = {v_cdf(side, t): 1.0}
        model.add_variable(v_cdf(side, t), 0.0, 1.0)
        for l, iv in enumerate(intervals):
            b = v_seg(side, t, l)
            w = v_pos(side, t, l)
            model.add_binary(b)
            model.add_variable(w, min(iv.lo, 0.0), max(iv.hi, 0.0))
            pick[b] = 1.0
            pos_sum[w] = 1.0
            # position is pinned to the interval when selected, to 0 otherwise
            model.add_constraint(f"pos_{side}_lo[{t},{l}]", {w: 1.0, b: -iv.lo}, ">=", 0.0)
            model.add_constraint(f"pos_{side}_hi[{t},{l}]", {w: 1.0, b: -iv.hi}, "<=", 0.0)
            cdf_def[b] = cdf_def.get(b, 0.0) - iv.intercept
            cdf_def[w] = cdf_def.get(w, 0.0) - iv.slope
        model.add_constraint(f"seg_{side}_pick[{t}]", pick, "==", 1.0)
        model.add_constraint(f"pos_{side}_sum[{t}]", pos_sum, "==", 0.0)
        model.add_constraint(f"cdf_{side}_def[{t}]", cdf_def, "==", 0.0)

    model.add_variable(v_psi(t), 0.0, 1.0)
    model.add_constraint(
        f"psi_def[{t}]",
        {v_psi(t): 1.0, v_cdf("u", t): -1.0, v_cdf("l", t): 1.0},
        "==",
        0.0,
    )
    model.add_constraint(f"psi_req[{t}]", {v_psi(t): 1.0}, ">=", fleet.psi_req)


def _set_objective(model: MilpModel, fleet: FleetSpec, n_t: int) -> None:
    """Total operating cost: block energy, no-load, startup, grid exchange,
    battery-throughput degradation, and reserve capacity payments. Every
    $/kWh-priced term scales by the period length; startup charges are per
    event."""
    dt = fleet.dt
    terms: dict[str, float] = {}

    def add(name: str, coef: float) -> None:
        if coef != 0.0:
            terms[name] = terms.get(name, 0.0) + coef

    for mg in fleet.microgrids:
        for u in mg.units:
            for t in range(n_t):
                for m, blk in enumerate(u.offer_blocks):
                    add(v_block(mg.id, u.id, t, m), dt * blk.marginal_cost)
                add(v_commit(mg.id, u.id, t), dt * u.no_load_cost)
                add(v_startup(mg.id, u.id, t), 1.0)
                add(v_res_up(mg.id, u.id, t), dt * u.reserve_up_cost)
                add(v_res_dn(mg.id, u.id, t), dt * u.reserve_dn_cost)
        for b in mg.batteries:
            for t in range(n_t):
                add(v_charge(mg.id, b.id, t), dt * b.degradation_cost)
                add(v_discharge(mg.id, b.id, t), dt * b.degradation_cost)
                add(v_bat_res_up(mg.id, b.id, t), dt * b.reserve_up_cost)
                add(v_bat_res_dn(mg.id, b.id, t), dt * b.reserve_dn_cost)
        for t in range(n_t):
            add(v_pcc(mg.id, t), dt * fleet.prices[t])
    model.set_objective(terms)


def decode_solution(info: DecodeInfo, values: dict[str, float], objective: float,
                    gap: float, status: str, solve_seconds: float, mode: str) -> Schedule:
    """Turn raw variable values into a Schedule with recomputed costs and the
    model-side PSI series."""
    fleet = info.fleet
    n_t = fleet.n_periods
    mgs: list[MicrogridSchedule] = []
    for mg in fleet.microgrids:
        units = []
        for u in mg.units:
            units.append(
                UnitSchedule(
                    id=u.id,
                    committed=[int(round(values[v_commit(mg.id, u.id, t)])) for t in range(n_t)],
                    power=[values[v_power(mg.id, u.id, t)] for t in range(n_t)],
                    block_power=[
                        [values[v_block(mg.id, u.id, t, m)] for m in range(len(u.offer_blocks))]
                        for t in range(n_t)
                    ],
                    startup_cost=_startup_series(u, values, mg.id, n_t),
                    reserve_up=[values[v_res_up(mg.id, u.id, t)] for t in range(n_t)],
                    reserve_dn=[values[v_res_dn(mg.id, u.id, t)] for t in range(n_t)],
                )
            )
        bats = []
        for b in mg.batteries:
            bats.append(
                BatterySchedule(
                    id=b.id,
                    charging=[int(round(values[v_charge_on(mg.id, b.id, t)])) for t in range(n_t)],
                    discharging=[
                        int(round(values[v_discharge_on(mg.id, b.id, t)])) for t in range(n_t)
                    ],
                    charge_power=[values[v_charge(mg.id, b.id, t)] for t in range(n_t)],
                    discharge_power=[values[v_discharge(mg.id, b.id, t)] for t in range(n_t)],
                    net_power=[values[v_bat_power(mg.id, b.id, t)] for t in range(n_t)],
                    soc=[values[v_soc(mg.id, b.id, t)] for t in range(n_t)],
                    reserve_up=[values[v_bat_res_up(mg.id, b.id, t)] for t in range(n_t)],
                    reserve_dn=[values[v_bat_res_dn(mg.id, b.id, t)] for t in range(n_t)],
                )
            )
        mgs.append(
            MicrogridSchedule(
                id=mg.id, units=units, batteries=bats,
                pcc=[values[v_pcc(mg.id, t)] for t in range(n_t)],
            )
        )

    psi_model = []
    for t in range(n_t):
        kind = info.psi_kind[t]
        if kind == "pwl":
            psi_model.append(values[v_psi(t)])
        elif kind == "deterministic":
            psi_model.append(1.0)
        else:
            # chance constraint not in the model: report what the linearized
            # CDF would certify for the realized window
            ru = sum(
                sum(u.reserve_up[t] for u in m.units) + sum(b.reserve_up[t] for b in m.batteries)
                for m in mgs
            )
            rd = sum(
                sum(u.reserve_dn[t] for u in m.units) + sum(b.reserve_dn[t] for b in m.batteries)
                for m in mgs
            )
            pcc = sum(m.pcc[t] for m in mgs)
            psi_model.append(
                unc.psi_pwl(info.pwl, ru, rd, pcc, float(info.mu[t]), float(info.sigma[t]))
            )

    cost = compute_cost_breakdown(mgs, fleet)
    _check_cost_consistency(cost, objective, gap)
    return Schedule(
        mode=mode,
        psi_req=fleet.psi_req,
        n_periods=n_t,
        dt=fleet.dt,
        microgrids=mgs,
        psi_model=psi_model,
        mu=[float(x) for x in info.mu],
        sigma=[float(x) for x in info.sigma],
        cost=cost,
        objective_value=objective,
        gap=gap,
        status=status,
        solve_seconds=solve_seconds,
    )


def _startup_series(u: DispatchableUnit, values: dict[str, float], mg_id: str, n_t: int) -> list[float]:
    """Startup charges recomputed from the commitment pattern (the model's
    epigraph variables can only sit above this)."""
    out = []
    prev = 1 if u.initially_on else 0
    for t in range(n_t):
        on = int(round(values[v_commit(mg_id, u.id, t)]))
        out.append(u.startup_cost * max(0, on - prev))
        prev = on
    return out


def _check_cost_consistency(cost: CostBreakdown, objective: float, gap: float) -> None:
    tol = (1e-6 + max(gap, 0.0)) * max(1.0, abs(objective))
    if abs(cost.total - objective) > tol:
        raise BuildError(
            f"decoded cost breakdown {cost.total:.6f} disagrees with solver "
            f"objective {objective:.6f} beyond tolerance {tol:.2e}"
        )
