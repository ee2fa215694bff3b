"""Loading, saving and validating fleet configuration files.

The config format is a single JSON document with top-level keys
``microgrids``, ``prices``, ``dt``, ``tau``, ``psi_req``, ``uncertainty``
and ``mode``; see docs/config_schema.md. Loading applies defaults and
enforces every domain invariant, so any FleetSpec obtained through
``load_fleet`` is guaranteed clean.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from . import uncertainty as unc
from .models import FleetSpec

DEFAULT_Z_MAX = 4.0


class FleetConfigError(ValueError):
    """Malformed or invalid fleet configuration. ``violations`` carries one
    human-readable entry per broken rule."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = violations or []


def psi_cap(z_max: float = DEFAULT_Z_MAX) -> float:
    """Largest PSI the piecewise-linear CDF on [-z_max, z_max] can certify."""
    return unc.phi(z_max) - unc.phi(-z_max)


def fleet_from_dict(data: dict[str, Any]) -> FleetSpec:
    """Build a validated FleetSpec from parsed JSON, applying defaults."""
    try:
        fleet = FleetSpec.model_validate(data)
    except ValidationError as exc:
        details = [
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        ]
        raise FleetConfigError(
            "fleet config failed schema validation:\n  " + "\n  ".join(details),
            violations=details,
        ) from exc
    fleet = _apply_defaults(fleet)
    violations = validate_fleet(fleet)
    if violations:
        raise FleetConfigError(
            "fleet config violates invariants:\n  " + "\n  ".join(violations),
            violations=violations,
        )
    return fleet


def load_fleet(path: str | Path) -> FleetSpec:
    """Load and validate a fleet config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FleetConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FleetConfigError(
            f"config {path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise FleetConfigError(f"config {path} must be a JSON object")
    return fleet_from_dict(data)


def save_fleet(fleet: FleetSpec, path: str | Path) -> None:
    """Write a fleet back out as canonical JSON. ``load_fleet`` of the result
    reproduces the fleet field for field."""
    Path(path).write_text(
        json.dumps(fleet.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"
    )


def _apply_defaults(fleet: FleetSpec) -> FleetSpec:
    """Fill omitted PCC bounds with the fleet's coincident peak demand.

    An unbounded exchange would make the islanding constraint degenerate at
    high export, so the default caps exchange at the largest load the fleet
    ever serves.
    """
    default_bound = fleet.peak_total_demand()
    mgs = []
    for mg in fleet.microgrids:
        updates: dict[str, float] = {}
        if mg.pcc_import_max is None:
            updates["pcc_import_max"] = default_bound
        if mg.pcc_export_max is None:
            updates["pcc_export_max"] = default_bound
        mgs.append(mg.model_copy(update=updates) if updates else mg)
    return fleet.model_copy(update={"microgrids": mgs})


def validate_fleet(fleet: FleetSpec, z_max: float = DEFAULT_Z_MAX) -> list[str]:
    """Check every domain invariant; returns one description per violation.

    Total function: never raises, an empty list means the fleet is valid.
    """
    v: list[str] = []
    n_t = fleet.n_periods

    if fleet.n_microgrids < 1:
        v.append("FleetSpec.microgrids: at least one microgrid required")
    if fleet.dt <= 0:
        v.append("FleetSpec.dt: must be positive")
    if not 0 < fleet.tau <= fleet.dt:
        v.append("FleetSpec.tau: must satisfy 0 < tau <= dt")
    cap = psi_cap(z_max)
    if not 0.0 <= fleet.psi_req < cap:
        v.append(
            f"FleetSpec.psi_req: must lie in [0, {cap:.6f}) — the largest PSI "
            f"representable by the piecewise-linear CDF with z_max={z_max:g}"
        )
    if n_t < 1:
        v.append("FleetSpec.prices: at least one period required")

    seen_mg: set[str] = set()
    for mg in fleet.microgrids:
        ctx = f"MicrogridSpec[{mg.id}]"
        if mg.id in seen_mg:
            v.append(f"{ctx}.id: duplicate microgrid id")
        seen_mg.add(mg.id)
        for name, series in (
            ("wind_forecast", mg.wind_forecast),
            ("pv_forecast", mg.pv_forecast),
            ("demand_forecast", mg.demand_forecast),
        ):
            if len(series) != n_t:
                v.append(f"{ctx}.{name}: length {len(series)} != horizon length {n_t}")
            if any(x < 0 for x in series):
                v.append(f"{ctx}.{name}: forecasts must be nonnegative")
        for bound_name, bound in (
            ("pcc_import_max", mg.pcc_import_max),
            ("pcc_export_max", mg.pcc_export_max),
        ):
            if bound is not None and bound < 0:
                v.append(f"{ctx}.{bound_name}: must be nonnegative")

        seen_ids: set[str] = set()
        for u in mg.units:
            uctx = f"DispatchableUnit[{mg.id}.{u.id}]"
            if u.id in seen_ids:
                v.append(f"{uctx}.id: duplicate id within microgrid")
            seen_ids.add(u.id)
            if not 0 <= u.p_min <= u.p_max:
                v.append(f"{uctx}.p_min/p_max: need 0 <= p_min <= p_max")
            width_sum = sum(b.width for b in u.offer_blocks)
            span = u.p_max - u.p_min
            if any(b.width < 0 for b in u.offer_blocks):
                v.append(f"{uctx}.offer_blocks: block widths must be nonnegative")
            if not math.isclose(width_sum, span, rel_tol=1e-9, abs_tol=1e-6):
                v.append(
                    f"{uctx}.offer_blocks: block widths sum to {width_sum:g}, "
                    f"must equal p_max - p_min = {span:g}"
                )
            costs = [b.marginal_cost for b in u.offer_blocks]
            if any(c2 < c1 for c1, c2 in zip(costs, costs[1:])):
                v.append(f"{uctx}.offer_blocks: marginal costs must be nondecreasing (convex offer)")
            if u.ramp_up_rate <= 0 or u.ramp_down_rate <= 0:
                v.append(f"{uctx}.ramp_up_rate/ramp_down_rate: must be positive")
            if u.min_up < 1 or u.min_down < 1:
                v.append(f"{uctx}.min_up/min_down: must be at least 1 period")
            if (u.initial_on_periods > 0) == (u.initial_off_periods > 0):
                v.append(
                    f"{uctx}.initial_on_periods/initial_off_periods: exactly one must be positive"
                )
            if u.initial_on_periods < 0 or u.initial_off_periods < 0:
                v.append(f"{uctx}.initial_on_periods/initial_off_periods: must be nonnegative")

        for b in mg.batteries:
            bctx = f"BatterySpec[{mg.id}.{b.id}]"
            if b.id in seen_ids:
                v.append(f"{bctx}.id: duplicate id within microgrid")
            seen_ids.add(b.id)
            if b.p_charge_max <= 0 or b.p_discharge_max <= 0:
                v.append(f"{bctx}.p_charge_max/p_discharge_max: must be positive")
            if not b.soc_min <= b.soc_initial <= b.soc_max:
                v.append(f"{bctx}.soc_initial: must lie within [soc_min, soc_max]")
            if b.soc_min > b.soc_max:
                v.append(f"{bctx}.soc_min/soc_max: need soc_min <= soc_max")
            if not (0 < b.eta_c <= 1 and 0 < b.eta_d <= 1):
                v.append(f"{bctx}.eta_c/eta_d: efficiencies must lie in (0, 1]")
            if b.soc_terminal_min is not None and not b.soc_min <= b.soc_terminal_min <= b.soc_max:
                v.append(f"{bctx}.soc_terminal_min: must lie within [soc_min, soc_max]")

    # uncertainty model: dimension and validity checks via resolution
    if not v:
        try:
            unc.resolve_uncertainty(fleet)
        except ValueError as exc:
            v.append(f"UncertaintyModel: {exc}")
    return v
