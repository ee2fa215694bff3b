"""Solver-agnostic sparse MILP representation.

A model is built incrementally (single writer) and then handed to a backend
or the MPS writer. All decision variables of the scheduling formulation live
here as named variables; nothing in this module knows about microgrids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal

VarKind = Literal["continuous", "binary"]
Sense = Literal["<=", ">=", "=="]

_SENSES = ("<=", ">=", "==")


class ModelError(ValueError):
    """Violation of the model-building contract (duplicate or unknown names,
    non-finite coefficients, malformed bounds)."""


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float
    ub: float
    kind: VarKind


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple[tuple[int, float], ...]  # (variable index, coefficient)
    sense: Sense
    rhs: float


@dataclass
class MilpModel:
    """Sparse mixed-integer linear program, minimization objective."""

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    _var_index: dict[str, int] = field(default_factory=dict, repr=False)
    _row_names: set[str] = field(default_factory=set, repr=False)

    # -- builder operations -------------------------------------------------

    def add_variable(
        self,
        name: str,
        lb: float = 0.0,
        ub: float = math.inf,
        kind: VarKind = "continuous",
    ) -> int:
        if name in self._var_index:
            raise ModelError(f"duplicate variable name {name!r}")
        if math.isnan(lb) or math.isnan(ub):
            raise ModelError(f"variable {name!r}: NaN bound")
        if lb > ub:
            raise ModelError(f"variable {name!r}: lb {lb} > ub {ub}")
        if kind == "binary" and not (0.0 <= lb and ub <= 1.0):
            raise ModelError(f"binary variable {name!r}: bounds must lie within [0, 1]")
        if kind not in ("continuous", "binary"):
            raise ModelError(f"variable {name!r}: unknown kind {kind!r}")
        idx = len(self.variables)
        self.variables.append(Variable(name, float(lb), float(ub), kind))
        self._var_index[name] = idx
        return idx

    def add_binary(self, name: str) -> int:
        return self.add_variable(name, 0.0, 1.0, "binary")

    def add_constraint(
        self,
        name: str,
        coeffs: dict[str, float] | Iterable[tuple[str, float]],
        sense: Sense,
        rhs: float,
    ) -> int:
        if name in self._row_names:
            raise ModelError(f"duplicate constraint name {name!r}")
        if sense not in _SENSES:
            raise ModelError(f"constraint {name!r}: unknown sense {sense!r}")
        if not math.isfinite(rhs):
            raise ModelError(f"constraint {name!r}: rhs must be finite")
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        resolved: dict[int, float] = {}
        for var_name, coef in items:
            if var_name not in self._var_index:
                raise ModelError(f"constraint {name!r}: unknown variable {var_name!r}")
            if not math.isfinite(coef):
                raise ModelError(f"constraint {name!r}: non-finite coefficient on {var_name!r}")
            idx = self._var_index[var_name]
            resolved[idx] = resolved.get(idx, 0.0) + float(coef)
        self.constraints.append(Constraint(name, tuple(sorted(resolved.items())), sense, float(rhs)))
        self._row_names.add(name)
        return len(self.constraints) - 1

    def set_objective(self, coeffs: dict[str, float] | Iterable[tuple[str, float]]) -> None:
        """Replace the (minimization) objective."""
        items = coeffs.items() if isinstance(coeffs, dict) else coeffs
        objective: dict[int, float] = {}
        for var_name, coef in items:
            if var_name not in self._var_index:
                raise ModelError(f"objective: unknown variable {var_name!r}")
            if not math.isfinite(coef):
                raise ModelError(f"objective: non-finite coefficient on {var_name!r}")
            idx = self._var_index[var_name]
            objective[idx] = objective.get(idx, 0.0) + float(coef)
        self.objective = objective

    def add_objective_term(self, var_name: str, coef: float) -> None:
        if var_name not in self._var_index:
            raise ModelError(f"objective: unknown variable {var_name!r}")
        if not math.isfinite(coef):
            raise ModelError(f"objective: non-finite coefficient on {var_name!r}")
        idx = self._var_index[var_name]
        self.objective[idx] = self.objective.get(idx, 0.0) + float(coef)

    # -- inspection ----------------------------------------------------------

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @property
    def n_binaries(self) -> int:
        return sum(1 for v in self.variables if v.kind == "binary")

    def variable_index(self, name: str) -> int:
        return self._var_index[name]

    def has_variable(self, name: str) -> bool:
        return name in self._var_index


@dataclass(frozen=True)
class MilpSolution:
    """Backend outcome. ``values`` is only present for optimal/feasible-gap."""

    status: Literal["optimal", "feasible-gap", "infeasible", "unbounded", "error"]
    objective: float | None = None
    values: dict[str, float] | None = None
    gap: float | None = None  # achieved relative MIP gap
    message: str = ""
    solve_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible-gap")


def constraint_residuals(model: MilpModel, values: dict[str, float]) -> dict[str, float]:
    """Violation amount per constraint and variable bound, evaluated directly
    from the model data (no solver involvement). Zero means satisfied.
    """
    x = [values[v.name] for v in model.variables]
    out: dict[str, float] = {}
    for con in model.constraints:
        lhs = sum(coef * x[idx] for idx, coef in con.coeffs)
        if con.sense == "<=":
            out[con.name] = max(0.0, lhs - con.rhs)
        elif con.sense == ">=":
            out[con.name] = max(0.0, con.rhs - lhs)
        else:
            out[con.name] = abs(lhs - con.rhs)
    for v, val in zip(model.variables, x):
        bound_violation = max(0.0, v.lb - val, val - v.ub)
        integrality = abs(val - round(val)) if v.kind == "binary" else 0.0
        out[f"bound[{v.name}]"] = max(bound_violation, integrality)
    return out


def max_scaled_residual(model: MilpModel, values: dict[str, float]) -> float:
    """Largest residual scaled by max(1, |rhs|), the backend's feasibility
    contract."""
    worst = 0.0
    x = [values[v.name] for v in model.variables]
    for con in model.constraints:
        lhs = sum(coef * x[idx] for idx, coef in con.coeffs)
        if con.sense == "<=":
            viol = max(0.0, lhs - con.rhs)
        elif con.sense == ">=":
            viol = max(0.0, con.rhs - lhs)
        else:
            viol = abs(lhs - con.rhs)
        worst = max(worst, viol / max(1.0, abs(con.rhs)))
    for v, val in zip(model.variables, x):
        viol = max(0.0, (v.lb - val) if math.isfinite(v.lb) else 0.0,
                   (val - v.ub) if math.isfinite(v.ub) else 0.0)
        if v.kind == "binary":
            viol = max(viol, abs(val - round(val)))
        worst = max(worst, viol)
    return worst
