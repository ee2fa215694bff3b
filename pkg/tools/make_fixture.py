"""Generate the synthetic desk-scale fleet configs shipped in configs/.

The three-microgrid fleet is a synthetic stand-in sized like a lab-scale
test system: three identical microgrids on one bus, 24 hourly periods,
time-of-use prices, and forecast-error std devs of 15% (wind), 15% (PV)
and 3% (demand) of the respective forecasts.
"""

import json
from pathlib import Path

DEMAND = [48, 45, 43, 42, 42, 44, 52, 63, 75, 72, 68, 66,
          65, 64, 63, 66, 72, 84, 95, 92, 82, 70, 58, 51]
WIND = [22, 24, 25, 23, 21, 18, 14, 11, 9, 8, 8, 9,
        10, 9, 8, 9, 11, 13, 15, 17, 19, 21, 22, 23]
PV = [0, 0, 0, 0, 0, 1, 4, 9, 15, 21, 26, 29,
      30, 29, 25, 19, 12, 6, 2, 0, 0, 0, 0, 0]
PRICES = [0.06, 0.06, 0.06, 0.06, 0.06, 0.06, 0.08, 0.12, 0.12, 0.12, 0.12, 0.12,
          0.12, 0.12, 0.12, 0.12, 0.12, 0.19, 0.19, 0.19, 0.19, 0.12, 0.06, 0.06]


def microgrid(idx: int) -> dict:
    return {
        "id": f"mg{idx}",
        "pcc_import_max": 120.0,
        "pcc_export_max": 60.0,
        "wind_forecast": [float(x) for x in WIND],
        "pv_forecast": [float(x) for x in PV],
        "demand_forecast": [float(x) for x in DEMAND],
        "units": [
            {
                "id": "gen_a",
                "p_min": 8.0,
                "p_max": 60.0,
                "offer_blocks": [
                    {"width": 20.0, "marginal_cost": 0.085},
                    {"width": 20.0, "marginal_cost": 0.105},
                    {"width": 12.0, "marginal_cost": 0.135},
                ],
                "no_load_cost": 0.6,
                "startup_cost": 1.2,
                "ramp_up_rate": 120.0,
                "ramp_down_rate": 120.0,
                "min_up": 3,
                "min_down": 2,
                "initial_on_periods": 2,
                "initial_off_periods": 0,
                "initial_power": 20.0,
                "reserve_up_cost": 0.010,
                "reserve_dn_cost": 0.010,
            },
            {
                "id": "gen_b",
                "p_min": 5.0,
                "p_max": 40.0,
                "offer_blocks": [
                    {"width": 20.0, "marginal_cost": 0.115},
                    {"width": 15.0, "marginal_cost": 0.150},
                ],
                "no_load_cost": 0.4,
                "startup_cost": 0.8,
                "ramp_up_rate": 100.0,
                "ramp_down_rate": 100.0,
                "min_up": 2,
                "min_down": 2,
                "initial_on_periods": 0,
                "initial_off_periods": 2,
                "initial_power": 0.0,
                "reserve_up_cost": 0.012,
                "reserve_dn_cost": 0.012,
            },
        ],
        "batteries": [
            {
                "id": "bess",
                "p_charge_max": 20.0,
                "p_discharge_max": 20.0,
                "soc_min": 10.0,
                "soc_max": 90.0,
                "soc_initial": 50.0,
                "soc_terminal_min": 50.0,
                "eta_c": 0.95,
                "eta_d": 0.95,
                "degradation_cost": 0.004,
                "reserve_up_cost": 0.006,
                "reserve_dn_cost": 0.006,
            }
        ],
    }


def three_mg_fleet() -> dict:
    return {
        "mode": "networked",
        "dt": 1.0,
        "tau": 0.25,
        "psi_req": 0.95,
        "prices": PRICES,
        "microgrids": [microgrid(i) for i in (1, 2, 3)],
        "uncertainty": {
            "wind_sigma": {"fraction": 0.15},
            "pv_sigma": {"fraction": 0.15},
            "demand_sigma": {"fraction": 0.03},
        },
    }


def minimal_fleet() -> dict:
    return {
        "mode": "networked",
        "dt": 1.0,
        "tau": 0.25,
        "psi_req": 0.0,
        "prices": [0.10],
        "microgrids": [
            {
                "id": "mg1",
                "wind_forecast": [0.0],
                "pv_forecast": [0.0],
                "demand_forecast": [10.0],
                "units": [
                    {
                        "id": "gen1",
                        "p_min": 0.0,
                        "p_max": 15.0,
                        "offer_blocks": [{"width": 15.0, "marginal_cost": 0.09}],
                        "initial_off_periods": 1,
                    }
                ],
                "batteries": [],
            }
        ],
        "uncertainty": {"demand_sigma": {"value": 0.0}},
    }


if __name__ == "__main__":
    out = Path(__file__).resolve().parent.parent / "configs"
    out.mkdir(exist_ok=True)
    (out / "three_mg_day.json").write_text(json.dumps(three_mg_fleet(), indent=2) + "\n")
    (out / "minimal.json").write_text(json.dumps(minimal_fleet(), indent=2) + "\n")
    print(f"wrote {out / 'three_mg_day.json'} and {out / 'minimal.json'}")
