import math

import pytest

from islesched.milp import (
    BackendError,
    MilpModel,
    ModelError,
    available_backends,
    constraint_residuals,
    max_scaled_residual,
    solve,
)
from islesched.milp.backend import ENV_BACKEND


class TestBuilder:
    def test_empty_plus_binary(self):
        m = MilpModel()
        m.add_binary("b")
        assert m.n_variables == 1
        assert m.variables[0].lb == 0.0 and m.variables[0].ub == 1.0
        assert m.n_binaries == 1

    def test_unknown_variable_in_row(self):
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(ModelError, match="unknown variable"):
            m.add_constraint("c", {"y": 1.0}, "<=", 1.0)

    def test_duplicate_variable_name(self):
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(ModelError, match="duplicate"):
            m.add_variable("x")

    def test_duplicate_constraint_name(self):
        m = MilpModel()
        m.add_variable("x")
        m.add_constraint("c", {"x": 1.0}, "<=", 1.0)
        with pytest.raises(ModelError, match="duplicate"):
            m.add_constraint("c", {"x": 2.0}, "<=", 2.0)

    def test_nan_coefficient_rejected(self):
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(ModelError, match="non-finite"):
            m.add_constraint("c", {"x": math.nan}, "<=", 1.0)
        with pytest.raises(ModelError, match="non-finite"):
            m.set_objective({"x": math.inf})

    def test_binary_bounds_must_fit(self):
        m = MilpModel()
        with pytest.raises(ModelError, match="within"):
            m.add_variable("b", 0.0, 2.0, "binary")

    def test_crossed_bounds_rejected(self):
        m = MilpModel()
        with pytest.raises(ModelError, match="lb"):
            m.add_variable("x", 3.0, 1.0)

    def test_fixed_variable_forces_value(self):
        m = MilpModel()
        m.add_variable("x", 3.0, 3.0)
        m.add_variable("y", 0.0, 10.0)
        m.add_constraint("c", {"x": 1.0, "y": 1.0}, ">=", 5.0)
        m.set_objective({"y": 1.0})
        sol = solve(m)
        assert sol.status == "optimal"
        assert sol.values["x"] == pytest.approx(3.0, abs=1e-9)
        assert sol.values["y"] == pytest.approx(2.0, abs=1e-6)

    def test_repeated_variable_in_row_accumulates(self):
        m = MilpModel()
        m.add_variable("x", 0.0, 10.0)
        m.add_constraint("c", [("x", 1.0), ("x", 1.0)], ">=", 4.0)
        m.set_objective({"x": 1.0})
        sol = solve(m)
        assert sol.values["x"] == pytest.approx(2.0, abs=1e-7)


class TestSolve:
    def test_lower_bounded_minimum(self):
        m = MilpModel()
        m.add_variable("x", 0.0, 10.0)
        m.add_constraint("c", {"x": 1.0}, ">=", 2.0)
        m.set_objective({"x": 1.0})
        sol = solve(m)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(2.0, abs=1e-9)

    def test_infeasible(self):
        m = MilpModel()
        m.add_variable("x")
        m.add_constraint("lo", {"x": 1.0}, ">=", 1.0)
        m.add_constraint("hi", {"x": 1.0}, "<=", 0.0)
        sol = solve(m)
        assert sol.status == "infeasible"
        assert sol.values is None

    def test_unbounded(self):
        m = MilpModel()
        m.add_variable("x", -math.inf, math.inf)
        m.set_objective({"x": 1.0})
        sol = solve(m)
        assert sol.status == "unbounded"

    def test_knapsack(self):
        m = MilpModel()
        m.add_binary("a")
        m.add_binary("b")
        m.add_constraint("cap", {"a": 1.0, "b": 1.0}, "<=", 1.0)
        m.set_objective({"a": -3.0, "b": -2.0})
        sol = solve(m)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(-3.0)
        assert sol.values == {"a": 1.0, "b": 0.0}

    def test_gap_reported(self):
        m = MilpModel()
        m.add_binary("a")
        m.set_objective({"a": 1.0})
        sol = solve(m, rel_gap=1e-4)
        assert sol.gap is not None and sol.gap <= 1e-4

    def test_solution_satisfies_contract(self):
        m = MilpModel()
        for i in range(6):
            m.add_binary(f"b{i}")
        m.add_variable("x", 0.0, 100.0)
        m.add_constraint("mix", {f"b{i}": float(i + 1) for i in range(6)} | {"x": 1.0}, ">=", 7.0)
        m.add_constraint("budget", {f"b{i}": 1.0 for i in range(6)}, "<=", 2.0)
        m.set_objective({"x": 1.0} | {f"b{i}": 0.5 for i in range(6)})
        sol = solve(m)
        assert sol.status == "optimal"
        assert max_scaled_residual(m, sol.values) <= 1e-6

    def test_unknown_backend(self):
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(BackendError, match="unknown backend"):
            solve(m, backend="cplex")

    def test_backend_env_selection(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "does-not-exist")
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(BackendError, match="unknown backend"):
            solve(m)
        monkeypatch.setenv(ENV_BACKEND, available_backends()[0])
        m.set_objective({"x": 1.0})
        assert solve(m).status == "optimal"

    def test_negative_gap_rejected(self):
        m = MilpModel()
        m.add_variable("x")
        with pytest.raises(ValueError):
            solve(m, rel_gap=-0.1)


class TestResidualChecker:
    def test_zero_residuals_on_feasible_point(self):
        m = MilpModel()
        m.add_variable("x", 0.0, 5.0)
        m.add_constraint("c", {"x": 2.0}, "<=", 10.0)
        res = constraint_residuals(m, {"x": 5.0})
        assert res["c"] == 0.0
        assert res["bound[x]"] == 0.0

    def test_violations_measured(self):
        m = MilpModel()
        m.add_variable("x", 0.0, 5.0)
        m.add_binary("b")
        m.add_constraint("c", {"x": 1.0}, "<=", 3.0)
        m.add_constraint("e", {"x": 1.0, "b": 1.0}, "==", 2.0)
        res = constraint_residuals(m, {"x": 4.0, "b": 0.5})
        assert res["c"] == pytest.approx(1.0)
        assert res["e"] == pytest.approx(2.5)
        assert res["bound[b]"] == pytest.approx(0.5)
