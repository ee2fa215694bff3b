"""Domain types for microgrid fleets.

Types here are deliberately permissive at construction (types and shapes
only); domain invariants are enforced by ``fleet_io.validate_fleet`` so a
partially invalid object can still be built, inspected and reported on.
All types are frozen and safe to share across threads.

Units: power kW, energy kWh, money $, time hours.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


class OfferBlock(BaseModel):
    """One step of a generator's convex stepwise offer above minimum output."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    width: float  # kW of output available in this block
    marginal_cost: float  # $/kWh


class DispatchableUnit(BaseModel):
    """A dispatchable generator (diesel, microturbine, fuel cell)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    p_min: float  # kW
    p_max: float  # kW
    offer_blocks: list[OfferBlock]
    no_load_cost: float = 0.0  # $/h while committed
    startup_cost: float = 0.0  # $ per start
    ramp_up_rate: float = Field(default=1e9)  # kW/h
    ramp_down_rate: float = Field(default=1e9)  # kW/h
    min_up: int = 1  # periods
    min_down: int = 1  # periods
    initial_on_periods: int = 0  # periods already on at horizon start
    initial_off_periods: int = 1  # periods already off at horizon start
    initial_power: float = 0.0  # kW, used only by optional ramp limits
    reserve_up_cost: float = 0.0  # $/kWh
    reserve_dn_cost: float = 0.0  # $/kWh

    @property
    def initially_on(self) -> bool:
        return self.initial_on_periods > 0


class BatterySpec(BaseModel):
    """Battery energy storage system."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    p_charge_max: float  # kW
    p_discharge_max: float  # kW
    soc_min: float  # kWh
    soc_max: float  # kWh
    soc_initial: float  # kWh
    eta_c: float = 1.0
    eta_d: float = 1.0
    degradation_cost: float = 0.0  # $/kWh of charge+discharge throughput
    reserve_up_cost: float = 0.0  # $/kWh
    reserve_dn_cost: float = 0.0  # $/kWh
    soc_terminal_min: float | None = None  # kWh floor on end-of-horizon SOC


class MicrogridSpec(BaseModel):
    """One microgrid: dispatchable units, batteries, forecasts and its PCC."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str
    units: list[DispatchableUnit] = Field(default_factory=list)
    batteries: list[BatterySpec] = Field(default_factory=list)
    wind_forecast: list[float]
    pv_forecast: list[float]
    demand_forecast: list[float]
    pcc_import_max: float | None = None  # kW; None = fleet default at load
    pcc_export_max: float | None = None  # kW

    @property
    def n_periods(self) -> int:
        return len(self.demand_forecast)


class SourceSigma(BaseModel):
    """Std dev of one forecast-error source, in one of three forms:
    a fraction of the forecast, a constant kW value, or explicit kW series
    keyed by microgrid id. Exactly one form must be given.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    fraction: float | None = None
    value: float | None = None
    series: dict[str, list[float]] | None = None

    def form_count(self) -> int:
        return sum(x is not None for x in (self.fraction, self.value, self.series))


class SourceMean(BaseModel):
    """Mean (bias) of one forecast-error source; zero when omitted."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    value: float | None = None
    series: dict[str, list[float]] | None = None


ZERO_SIGMA = SourceSigma(value=0.0)


class UncertaintyModel(BaseModel):
    """Per-source Gaussian error model plus cross-microgrid correlations.

    Correlation matrices are N_M x N_M, indexed in fleet microgrid order;
    None means independent (identity).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    wind_sigma: SourceSigma = ZERO_SIGMA
    pv_sigma: SourceSigma = ZERO_SIGMA
    demand_sigma: SourceSigma = ZERO_SIGMA
    wind_mean: SourceMean | None = None
    pv_mean: SourceMean | None = None
    demand_mean: SourceMean | None = None
    corr_wind: list[list[float]] | None = None
    corr_pv: list[list[float]] | None = None
    corr_demand: list[list[float]] | None = None


Mode = Literal["independent", "networked"]


class FleetSpec(BaseModel):
    """One or more microgrids scheduled against a common distribution grid.

    Sign convention: pcc power > 0 imports from the grid, < 0 exports and
    earns the same per-period price.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    microgrids: list[MicrogridSpec]
    prices: list[float]  # $/kWh at the PCC, length N_T
    dt: float = 1.0  # hours per period
    tau: float = 0.25  # hours to deliver reserve
    psi_req: float = 0.0
    uncertainty: UncertaintyModel = Field(default_factory=UncertaintyModel)
    mode: Mode = "networked"
    enable_ramp_limits: bool = False  # inter-period dispatch ramp constraints

    @property
    def n_microgrids(self) -> int:
        return len(self.microgrids)

    @property
    def n_periods(self) -> int:
        return len(self.prices)

    def microgrid(self, mg_id: str) -> MicrogridSpec:
        for mg in self.microgrids:
            if mg.id == mg_id:
                return mg
        raise KeyError(f"no microgrid with id {mg_id!r}")

    def peak_total_demand(self) -> float:
        """Fleet-wide coincident peak demand, the default PCC bound."""
        if not self.microgrids or self.n_periods == 0:
            return 0.0
        totals = [
            sum(mg.demand_forecast[t] for mg in self.microgrids)
            for t in range(self.n_periods)
        ]
        return max(totals)
