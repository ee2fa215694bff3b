import pytest

from islesched import uncertainty as unc
from islesched.fleet_io import fleet_from_dict
from islesched.scheduler import BuildError, build_milp
from tests.conftest import single_unit_config


def one_dg_one_battery_config(n_t: int = 24, psi_req: float = 0.9) -> dict:
    return {
        "mode": "networked",
        "dt": 1.0,
        "tau": 0.25,
        "psi_req": psi_req,
        "prices": [0.1] * n_t,
        "microgrids": [
            {
                "id": "mg1",
                "pcc_import_max": 50.0,
                "pcc_export_max": 50.0,
                "wind_forecast": [5.0] * n_t,
                "pv_forecast": [0.0] * n_t,
                "demand_forecast": [30.0] * n_t,
                "units": [
                    {
                        "id": "g1",
                        "p_min": 5.0,
                        "p_max": 40.0,
                        "offer_blocks": [
                            {"width": 20.0, "marginal_cost": 0.08},
                            {"width": 15.0, "marginal_cost": 0.12},
                        ],
                        "min_up": 3,
                        "min_down": 2,
                        "initial_on_periods": 1,
                        "initial_off_periods": 0,
                        "ramp_up_rate": 60.0,
                        "ramp_down_rate": 60.0,
                        "startup_cost": 1.0,
                        "no_load_cost": 0.5,
                    }
                ],
                "batteries": [
                    {
                        "id": "b1",
                        "p_charge_max": 10.0,
                        "p_discharge_max": 10.0,
                        "soc_min": 5.0,
                        "soc_max": 45.0,
                        "soc_initial": 25.0,
                        "eta_c": 0.9,
                        "eta_d": 0.9,
                    }
                ],
            }
        ],
        "uncertainty": {
            "wind_sigma": {"fraction": 0.15},
            "pv_sigma": {"fraction": 0.15},
            "demand_sigma": {"fraction": 0.03},
        },
    }


def window_row_count(n_t: int, duration: int, forced: int) -> int:
    """Rows the three-window scheme emits for one direction: one aggregated
    initial row when the boundary forces periods, one row per full window
    position after that, one row per tail position."""
    init = 1 if forced > 0 else 0
    first_middle = forced
    middle = max(0, (n_t - duration + 1) - first_middle)
    tail = n_t - max(forced, n_t - duration + 1)
    return init + middle + tail


def census(n_t, units, n_batteries, n_m, n_segments, psi_periods, det_periods):
    """Closed-form variable/binary/row counts of the formulation.

    ``units`` is a list of (n_blocks, min_up, min_down, on0, init_on, init_off)
    describing every unit in the fleet (across all microgrids);
    ``psi_periods``/``det_periods`` count periods with the probabilistic and
    the deterministic islanding constraint.
    """
    n_intervals = n_segments + 2
    n_vars = 0
    n_bins = 0
    n_rows = 0
    for n_blocks, *_ in units:
        n_vars += n_t * (5 + n_blocks)
        n_bins += n_t
        n_rows += n_t * 8
    for n_blocks, min_up, min_down, on0, init_on, init_off in units:
        if min_up > 1 or (on0 and min_up > init_on):
            forced = min(n_t, max(0, min_up - init_on)) if on0 else 0
            n_rows += window_row_count(n_t, min_up, forced)
        if min_down > 1 or (not on0 and min_down > init_off):
            forced = min(n_t, max(0, min_down - init_off)) if not on0 else 0
            n_rows += window_row_count(n_t, min_down, forced)
    n_vars += n_batteries * 8 * n_t
    n_bins += n_batteries * 2 * n_t
    n_rows += n_batteries * 9 * n_t
    n_vars += n_m * n_t  # pcc
    n_rows += n_t  # balance
    n_vars += psi_periods * (5 + 4 * n_intervals)
    n_bins += psi_periods * 2 * n_intervals
    n_rows += psi_periods * (10 + 4 * n_intervals)
    n_rows += det_periods * 2
    return n_vars, n_bins, n_rows


class TestCensus:
    def test_one_dg_one_battery_24_periods(self):
        fleet = fleet_from_dict(one_dg_one_battery_config())
        model, info = build_milp(fleet, unc.build_pwl_cdf(32, 4.0))
        expected = census(
            n_t=24,
            units=[(2, 3, 2, True, 1, 0)],
            n_batteries=1,
            n_m=1,
            n_segments=32,
            psi_periods=24,
            det_periods=0,
        )
        assert (model.n_variables, model.n_binaries, model.n_constraints) == expected

    def test_three_mg_fixture(self, three_mg_fleet):
        model, info = build_milp(three_mg_fleet, unc.build_pwl_cdf(32, 4.0))
        units = [
            # gen_a: 3 blocks, up 3 / down 2, on for 2 periods already
            (3, 3, 2, True, 2, 0),
            # gen_b: 2 blocks, up 2 / down 2, off for 2 periods already
            (2, 2, 2, False, 0, 2),
        ] * 3
        expected = census(
            n_t=24, units=units, n_batteries=3, n_m=3, n_segments=32,
            psi_periods=24, det_periods=0,
        )
        assert (model.n_variables, model.n_binaries, model.n_constraints) == expected

    def test_zero_sigma_periods_use_deterministic_window(self):
        cfg = one_dg_one_battery_config(n_t=4)
        cfg["uncertainty"] = {
            "wind_sigma": {"series": {"mg1": [0.0, 1.0, 0.0, 2.0]}},
            "pv_sigma": {"value": 0.0},
            "demand_sigma": {"value": 0.0},
        }
        fleet = fleet_from_dict(cfg)
        model, info = build_milp(fleet, unc.build_pwl_cdf(8, 4.0))
        assert info.psi_kind == ("deterministic", "pwl", "deterministic", "pwl")
        expected = census(
            n_t=4, units=[(2, 3, 2, True, 1, 0)], n_batteries=1, n_m=1,
            n_segments=8, psi_periods=2, det_periods=2,
        )
        assert (model.n_variables, model.n_binaries, model.n_constraints) == expected


def commitment_pattern_is_legal(pattern, min_up, min_down, on0, init_on, init_off):
    """Direct legality scan of a commitment pattern: every completed stretch
    must meet its minimum, counting the pre-horizon stretch; stretches cut by
    the horizon end are allowed."""
    state = 1 if on0 else 0
    run = init_on if on0 else init_off
    for on in pattern:
        if on == state:
            run += 1
            continue
        needed = min_up if state == 1 else min_down
        if run < needed:
            return False
        state, run = on, 1
    return True


class TestMinUpDownBruteForce:
    """The three-window rows must admit exactly the legal commitment
    patterns: fix the binaries to each of the 2^5 patterns and compare MILP
    feasibility against the direct scan."""

    @pytest.mark.parametrize(
        "min_up,min_down,on0,init_on,init_off",
        [
            (3, 2, True, 1, 0),
            (3, 2, True, 5, 0),
            (2, 3, False, 0, 1),
            (2, 3, False, 0, 3),
            (1, 1, True, 4, 0),
            (4, 4, False, 0, 2),
        ],
    )
    def test_fixed_patterns_match_scan(self, min_up, min_down, on0, init_on, init_off):
        from islesched.milp import solve

        n_t = 5
        cfg = one_dg_one_battery_config(n_t=n_t, psi_req=0.0)
        unit = cfg["microgrids"][0]["units"][0]
        unit.update(
            min_up=min_up, min_down=min_down,
            initial_on_periods=init_on, initial_off_periods=init_off,
            p_min=0.0, p_max=35.0,
            offer_blocks=[{"width": 35.0, "marginal_cost": 0.08}],
        )
        cfg["prices"] = [0.1] * n_t
        fleet = fleet_from_dict(cfg)
        for bits in range(2 ** n_t):
            pattern = [(bits >> t) & 1 for t in range(n_t)]
            model, _ = build_milp(fleet, unc.build_pwl_cdf(2, 4.0))
            for t, on in enumerate(pattern):
                idx = model.variable_index(f"u[mg1,g1,{t}]")
                var = model.variables[idx]
                model.variables[idx] = type(var)(var.name, float(on), float(on), var.kind)
            feasible = solve(model, rel_gap=1e-4).status in ("optimal", "feasible-gap")
            legal = commitment_pattern_is_legal(
                pattern, min_up, min_down, on0, init_on, init_off
            )
            assert feasible == legal, (
                f"pattern {pattern}: MILP {'feasible' if feasible else 'infeasible'} "
                f"but scan says {'legal' if legal else 'illegal'}"
            )


class TestPwlBlockAlgebra:
    """Pin the reserve window and check the model's certified PSI variable
    against the standalone chord evaluation of the same window."""

    @pytest.mark.parametrize("ru,rd,segments", [
        (2.0, 2.0, 32),
        (1.3, 0.4, 32),
        (0.0, 3.0, 16),
        (5.0, 5.0, 8),  # headroom-cap extreme: unit serves 5 kW of 10 kW capacity
        (0.1, 0.1, 32),
    ])
    def test_fixed_window_psi_matches_chord_evaluation(self, ru, rd, segments):
        from islesched.milp import solve
        from tests.conftest import single_unit_config

        cfg = single_unit_config(demand=5.0, price=5.0, marginal=10.0, psi_req=0.01,
                                 sigma=1.5, import_max=0.0, export_max=0.0)
        fleet = fleet_from_dict(cfg)
        pwl = unc.build_pwl_cdf(segments, 4.0)
        expected = unc.psi_pwl(pwl, ru, rd, 0.0, 0.0, 1.5)
        if expected < 0.01:
            pytest.skip("window below the modeled requirement")
        model, _ = build_milp(fleet, pwl)
        for name, value in (("ru[mg1,g1,0]", ru), ("rd[mg1,g1,0]", rd)):
            idx = model.variable_index(name)
            var = model.variables[idx]
            model.variables[idx] = type(var)(var.name, value, value, var.kind)
        solution = solve(model, rel_gap=1e-9)
        assert solution.status == "optimal"
        assert solution.values["psi[0]"] == pytest.approx(expected, abs=1e-7)
    def test_psi_zero_drops_interval_binaries(self):
        cfg = one_dg_one_battery_config(psi_req=0.0)
        fleet = fleet_from_dict(cfg)
        model, info = build_milp(fleet)
        names = [v.name for v in model.variables]
        assert not any(name.startswith(("bu[", "bl[", "psi[")) for name in names)
        assert all(kind == "off" for kind in info.psi_kind)

    def test_networked_three_pcc_one_balance(self, three_mg_fleet):
        model, _ = build_milp(three_mg_fleet)
        pcc_t0 = [v.name for v in model.variables if v.name.startswith("pcc[") and v.name.endswith(",0]")]
        assert len(pcc_t0) == 3
        balance_rows = [c for c in model.constraints if c.name.startswith("balance[")]
        assert len(balance_rows) == 24
        # each balance row references all three PCC variables
        row0 = next(c for c in balance_rows if c.name == "balance[0]")
        referenced = {model.variables[idx].name for idx, _ in row0.coeffs}
        assert {f"pcc[mg{i},0]" for i in (1, 2, 3)} <= referenced

    def test_psi_cap_enforced(self):
        cfg = one_dg_one_battery_config(psi_req=0.9999)
        fleet = fleet_from_dict(cfg)
        with pytest.raises(BuildError, match="not representable"):
            build_milp(fleet, unc.build_pwl_cdf(32, 3.0))

    def test_empty_fleet_rejected(self, three_mg_fleet):
        empty = three_mg_fleet.model_copy(update={"microgrids": []})
        with pytest.raises(BuildError, match="no microgrids"):
            build_milp(empty)

    def test_objective_scaling(self):
        # dt = 0.5 h halves every $/kWh term; startup stays per event
        cfg = single_unit_config(psi_req=0.0)
        cfg["dt"] = 0.5
        cfg["tau"] = 0.25
        fleet = fleet_from_dict(cfg)
        model, _ = build_milp(fleet)
        coef = {model.variables[i].name: c for i, c in model.objective.items()}
        assert coef["p[mg1,g1,0,0]"] == pytest.approx(0.5 * 10.0)
        assert coef["u[mg1,g1,0]"] == pytest.approx(0.5 * 0.5)
        assert coef["pcc[mg1,0]"] == pytest.approx(0.5 * 5.0)
        assert coef["ru[mg1,g1,0]"] == pytest.approx(0.5 * 0.01)

    def test_startup_cost_is_per_event(self):
        cfg = single_unit_config(psi_req=0.0)
        cfg["dt"] = 0.5
        cfg["microgrids"][0]["units"][0]["startup_cost"] = 3.0
        fleet = fleet_from_dict(cfg)
        model, _ = build_milp(fleet)
        coef = {model.variables[i].name: c for i, c in model.objective.items()}
        assert coef["su[mg1,g1,0]"] == 1.0

    def test_terminal_soc_bound_applied(self):
        cfg = one_dg_one_battery_config(n_t=3, psi_req=0.0)
        cfg["microgrids"][0]["batteries"][0]["soc_terminal_min"] = 30.0
        fleet = fleet_from_dict(cfg)
        model, _ = build_milp(fleet)
        last = model.variables[model.variable_index("soc[mg1,b1,2]")]
        mid = model.variables[model.variable_index("soc[mg1,b1,1]")]
        assert last.lb == 30.0
        assert mid.lb == 5.0

    def test_ramp_limit_rows_optional(self):
        cfg = one_dg_one_battery_config(n_t=3, psi_req=0.0)
        fleet = fleet_from_dict(cfg)
        model, _ = build_milp(fleet)
        assert not any(c.name.startswith("ramp_up[") for c in model.constraints)
        fleet_ramped = fleet.model_copy(update={"enable_ramp_limits": True})
        model2, _ = build_milp(fleet_ramped)
        ramp_rows = [c for c in model2.constraints if c.name.startswith(("ramp_up[", "ramp_dn["))]
        assert len(ramp_rows) == 2 * 3

    def test_z_bounds_cover_reachable_range(self, three_mg_fleet):
        model, info = build_milp(three_mg_fleet)
        zu = model.variables[model.variable_index("zu[0]")]
        # importing everything with zero reserve is the low extreme
        imports = sum(m.pcc_import_max for m in three_mg_fleet.microgrids)
        assert zu.lb <= (-imports - info.mu[0]) / info.sigma[0] + 1e-9
        assert zu.ub >= 0.0
