import json
from pathlib import Path

import pytest

from islesched.fleet_io import fleet_from_dict, load_fleet
from islesched.models import FleetSpec

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def minimal_config() -> dict:
    return json.loads((CONFIG_DIR / "minimal.json").read_text())


@pytest.fixture(scope="session")
def three_mg_fleet() -> FleetSpec:
    """The shipped synthetic three-microgrid, 24-hour fleet."""
    return load_fleet(CONFIG_DIR / "three_mg_day.json")


@pytest.fixture()
def minimal_fleet() -> FleetSpec:
    return fleet_from_dict(minimal_config())


def single_unit_config(
    demand: float = 4.0,
    price: float = 5.0,
    marginal: float = 10.0,
    no_load: float = 0.5,
    psi_req: float = 0.0,
    import_max: float = 100.0,
    export_max: float = 0.0,
    sigma: float = 0.0,
    p_min: float = 0.0,
    p_max: float = 10.0,
    reserve_cost: float = 0.01,
) -> dict:
    """One microgrid, one generator, one period: the analytic micro-case."""
    return {
        "mode": "networked",
        "dt": 1.0,
        "tau": 0.25,
        "psi_req": psi_req,
        "prices": [price],
        "microgrids": [
            {
                "id": "mg1",
                "pcc_import_max": import_max,
                "pcc_export_max": export_max,
                "wind_forecast": [0.0],
                "pv_forecast": [0.0],
                "demand_forecast": [demand],
                "units": [
                    {
                        "id": "g1",
                        "p_min": p_min,
                        "p_max": p_max,
                        "offer_blocks": [{"width": p_max - p_min, "marginal_cost": marginal}],
                        "no_load_cost": no_load,
                        "startup_cost": 0.0,
                        "ramp_up_rate": 40.0,
                        "ramp_down_rate": 40.0,
                        "initial_on_periods": 1,
                        "initial_off_periods": 0,
                        "reserve_up_cost": reserve_cost,
                        "reserve_dn_cost": reserve_cost,
                    }
                ],
                "batteries": [],
            }
        ],
        "uncertainty": {"demand_sigma": {"value": sigma}},
    }


def reserve_sizing_config() -> dict:
    """Single hour, sigma = 1 kW, PCC locked at zero, symmetric reserve
    prices: the cheapest feasible reserves at psi_req 0.95 sit near the
    two-sided 95% z-value on both sides."""
    cfg = single_unit_config(
        demand=5.0, price=5.0, marginal=10.0, no_load=0.0, psi_req=0.95,
        import_max=0.0, export_max=0.0, sigma=1.0, p_min=0.0, p_max=10.0,
    )
    return cfg
