"""Decoded scheduling results.

A Schedule carries every decision the MILP made, per period, in plain
per-device series, plus the cost breakdown recomputed from those decisions
and the model-side PSI. It is the exchange format between solver, validator,
service and CSV writers.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict

from ..models import FleetSpec


class UnitSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    committed: list[int]
    power: list[float]  # kW
    block_power: list[list[float]]  # kW per offer block
    startup_cost: list[float]  # $ incurred at each period's start decision
    reserve_up: list[float]  # kW
    reserve_dn: list[float]  # kW


class BatterySchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    charging: list[int]
    discharging: list[int]
    charge_power: list[float]  # kW
    discharge_power: list[float]  # kW
    net_power: list[float]  # kW, discharge - charge
    soc: list[float]  # kWh at period end
    reserve_up: list[float]  # kW
    reserve_dn: list[float]  # kW


class MicrogridSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    units: list[UnitSchedule]
    batteries: list[BatterySchedule]
    pcc: list[float]  # kW, import positive


class CostBreakdown(BaseModel):
    model_config = ConfigDict(frozen=True)

    energy: float
    no_load: float
    startup: float
    grid_exchange: float
    degradation: float
    reserve: float
    total: float


class Schedule(BaseModel):
    """Solved schedule for one island (the whole fleet in networked mode, a
    single microgrid in independent mode)."""

    model_config = ConfigDict(frozen=True)

    mode: str
    psi_req: float
    n_periods: int
    dt: float
    microgrids: list[MicrogridSchedule]
    psi_model: list[float]  # linearized PSI the solver certified
    mu: list[float]  # net-error mean the model used, kW
    sigma: list[float]  # net-error std dev the model used, kW
    cost: CostBreakdown
    objective_value: float
    gap: float
    status: str
    solve_seconds: float

    def reserve_up_total(self, t: int) -> float:
        return sum(
            sum(u.reserve_up[t] for u in mg.units) + sum(b.reserve_up[t] for b in mg.batteries)
            for mg in self.microgrids
        )

    def reserve_dn_total(self, t: int) -> float:
        return sum(
            sum(u.reserve_dn[t] for u in mg.units) + sum(b.reserve_dn[t] for b in mg.batteries)
            for mg in self.microgrids
        )

    def pcc_total(self, t: int) -> float:
        return sum(mg.pcc[t] for mg in self.microgrids)


def compute_cost_breakdown(schedule_mgs: list[MicrogridSchedule], fleet: FleetSpec) -> CostBreakdown:
    """Rebuild the cost categories from decision values and prices. Startup
    charges are recomputed from the commitment pattern, not read off the
    model's startup variables."""
    dt = fleet.dt
    energy = no_load = startup = grid = degradation = reserve = 0.0
    for mgs in schedule_mgs:
        mg = fleet.microgrid(mgs.id)
        units = {u.id: u for u in mg.units}
        bats = {b.id: b for b in mg.batteries}
        for us in mgs.units:
            spec = units[us.id]
            prev_on = 1 if spec.initially_on else 0
            for t in range(len(us.power)):
                energy += dt * sum(
                    blk.marginal_cost * p for blk, p in zip(spec.offer_blocks, us.block_power[t])
                )
                no_load += dt * spec.no_load_cost * us.committed[t]
                startup += spec.startup_cost * max(0, us.committed[t] - prev_on)
                reserve += dt * (
                    spec.reserve_up_cost * us.reserve_up[t]
                    + spec.reserve_dn_cost * us.reserve_dn[t]
                )
                prev_on = us.committed[t]
        for bs in mgs.batteries:
            spec = bats[bs.id]
            for t in range(len(bs.soc)):
                degradation += dt * spec.degradation_cost * (
                    bs.charge_power[t] + bs.discharge_power[t]
                )
                reserve += dt * (
                    spec.reserve_up_cost * bs.reserve_up[t]
                    + spec.reserve_dn_cost * bs.reserve_dn[t]
                )
        for t, pcc in enumerate(mgs.pcc):
            grid += dt * fleet.prices[t] * pcc
    total = energy + no_load + startup + grid + degradation + reserve
    return CostBreakdown(
        energy=energy,
        no_load=no_load,
        startup=startup,
        grid_exchange=grid,
        degradation=degradation,
        reserve=reserve,
        total=total,
    )
