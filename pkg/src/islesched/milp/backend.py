"""Solver backends behind a uniform contract.

Exactly one backend ships: scipy's HiGHS interface. The scheduler only ever
talks to ``solve``, so alternates can be registered without touching any
formulation code. Selection order: explicit argument, then the
ISLESCHED_BACKEND environment variable, then the default.
"""

from __future__ import annotations

import math
import os
import time
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, milp

from .model import MilpModel, MilpSolution

ENV_BACKEND = "ISLESCHED_BACKEND"
DEFAULT_BACKEND = "scipy-highs"

INTEGRALITY_TOL = 1e-6


class BackendError(RuntimeError):
    pass


def _to_arrays(model: MilpModel):
    n = model.n_variables
    c = np.zeros(n)
    for idx, coef in model.objective.items():
        c[idx] = coef
    lb = np.array([v.lb for v in model.variables])
    ub = np.array([v.ub for v in model.variables])
    integrality = np.array([1 if v.kind == "binary" else 0 for v in model.variables])
    rows, cols, vals = [], [], []
    con_lo = np.empty(model.n_constraints)
    con_hi = np.empty(model.n_constraints)
    for r, con in enumerate(model.constraints):
        for idx, coef in con.coeffs:
            rows.append(r)
            cols.append(idx)
            vals.append(coef)
        if con.sense == "<=":
            con_lo[r], con_hi[r] = -np.inf, con.rhs
        elif con.sense == ">=":
            con_lo[r], con_hi[r] = con.rhs, np.inf
        else:
            con_lo[r], con_hi[r] = con.rhs, con.rhs
    a = sp.csc_matrix((vals, (rows, cols)), shape=(model.n_constraints, n))
    return c, integrality, Bounds(lb, ub), a, con_lo, con_hi


def _solve_scipy_highs(model: MilpModel, rel_gap: float, time_limit: float | None) -> MilpSolution:
    c, integrality, bounds, a, con_lo, con_hi = _to_arrays(model)
    options: dict = {"mip_rel_gap": rel_gap}
    if time_limit is not None:
        options["time_limit"] = float(time_limit)
    constraints = LinearConstraint(a, con_lo, con_hi) if model.n_constraints else ()
    start = time.perf_counter()
    res = milp(
        c=c,
        constraints=constraints,
        integrality=integrality,
        bounds=bounds,
        options=options,
    )
    elapsed = time.perf_counter() - start

    # res.status: 0 optimal, 1 iteration/time limit, 2 infeasible, 3 unbounded
    if res.status == 2:
        return MilpSolution(status="infeasible", message=res.message, solve_seconds=elapsed)
    if res.status == 3:
        return MilpSolution(status="unbounded", message=res.message, solve_seconds=elapsed)
    if res.x is None:
        return MilpSolution(status="error", message=res.message, solve_seconds=elapsed)

    gap = getattr(res, "mip_gap", None)
    if gap is None or (isinstance(gap, float) and math.isnan(gap)):
        gap = 0.0
    values = _snap_values(model, res.x)
    status = "optimal" if res.status == 0 else "feasible-gap"
    return MilpSolution(
        status=status,
        objective=float(res.fun),
        values=values,
        gap=float(gap),
        message=res.message,
        solve_seconds=elapsed,
    )


def _snap_values(model: MilpModel, x: np.ndarray) -> dict[str, float]:
    """Round near-integral binaries; anything farther off than the
    integrality tolerance is a backend fault worth failing loudly on."""
    values: dict[str, float] = {}
    for v, val in zip(model.variables, x):
        val = float(val)
        if v.kind == "binary":
            nearest = round(val)
            if abs(val - nearest) > INTEGRALITY_TOL:
                raise BackendError(
                    f"backend returned non-integral value {val} for binary {v.name!r}"
                )
            val = float(nearest)
        values[v.name] = val
    return values


Backend = Callable[[MilpModel, float, "float | None"], MilpSolution]

BACKENDS: dict[str, Backend] = {
    "scipy-highs": _solve_scipy_highs,
}


def available_backends() -> list[str]:
    return sorted(BACKENDS)


def solve(
    model: MilpModel,
    rel_gap: float = 1e-4,
    time_limit: float | None = None,
    backend: str | None = None,
) -> MilpSolution:
    """Solve a model, minimizing. ``rel_gap`` is the relative MIP gap at
    which the backend may stop; ``time_limit`` is wall seconds (best
    incumbent is returned as feasible-gap on timeout)."""
    if rel_gap < 0:
        raise ValueError("rel_gap must be nonnegative")
    name = backend or os.environ.get(ENV_BACKEND, DEFAULT_BACKEND)
    if name not in BACKENDS:
        raise BackendError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}"
        )
    return BACKENDS[name](model, rel_gap, time_limit)
