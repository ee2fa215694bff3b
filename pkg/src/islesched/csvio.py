"""Deterministic CSV rendering of schedules, cost breakdowns, validation
reports and sweep results.

Every writer emits an optional timestamped comment line followed by a
one-line header. With timestamps suppressed the output is byte-identical
across runs for the same inputs; measured wall times are then also zeroed,
since they are the one other run-dependent quantity.
"""

from __future__ import annotations

import csv
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .experiments import ExperimentResult
from .scheduler.schedule import CostBreakdown, Schedule
from .validation import ValidationReport


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _write(path: Path, header: list[str], rows: list[list[Any]], timestamp: bool) -> None:
    with open(path, "w", newline="") as fh:
        if timestamp:
            fh.write(f"# generated {datetime.now(timezone.utc).isoformat()}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def write_schedule_csv(schedule: Schedule, path: str | Path, timestamp: bool = True) -> None:
    """Long-format schedule: one row per (period, microgrid, quantity)."""
    rows: list[list[Any]] = []
    for t in range(schedule.n_periods):
        for mg in schedule.microgrids:
            for u in mg.units:
                rows.append([t, mg.id, "commit", u.id, float(u.committed[t])])
                rows.append([t, mg.id, "power", u.id, u.power[t]])
                for m, p in enumerate(u.block_power[t]):
                    rows.append([t, mg.id, "block_power", f"{u.id}[{m}]", p])
                rows.append([t, mg.id, "startup_cost", u.id, u.startup_cost[t]])
                rows.append([t, mg.id, "reserve_up", u.id, u.reserve_up[t]])
                rows.append([t, mg.id, "reserve_dn", u.id, u.reserve_dn[t]])
            for b in mg.batteries:
                rows.append([t, mg.id, "charging", b.id, float(b.charging[t])])
                rows.append([t, mg.id, "discharging", b.id, float(b.discharging[t])])
                rows.append([t, mg.id, "charge_power", b.id, b.charge_power[t]])
                rows.append([t, mg.id, "discharge_power", b.id, b.discharge_power[t]])
                rows.append([t, mg.id, "net_power", b.id, b.net_power[t]])
                rows.append([t, mg.id, "soc", b.id, b.soc[t]])
                rows.append([t, mg.id, "reserve_up", b.id, b.reserve_up[t]])
                rows.append([t, mg.id, "reserve_dn", b.id, b.reserve_dn[t]])
            rows.append([t, mg.id, "pcc", "", mg.pcc[t]])
        rows.append([t, "", "psi_model", "", schedule.psi_model[t]])
    _write(Path(path), ["t", "mg", "var_kind", "id", "value"], rows, timestamp)


def write_cost_csv(cost: CostBreakdown, path: str | Path, timestamp: bool = True) -> None:
    rows = [
        ["energy", cost.energy],
        ["no_load", cost.no_load],
        ["startup", cost.startup],
        ["grid_exchange", cost.grid_exchange],
        ["degradation", cost.degradation],
        ["reserve", cost.reserve],
        ["total", cost.total],
    ]
    _write(Path(path), ["category", "dollars"], rows, timestamp)


def write_validation_csv(report: ValidationReport, path: str | Path, timestamp: bool = True) -> None:
    rows = [
        [p.t, p.model_psi, p.exact_psi, p.empirical_psi, p.ci_halfwidth, p.passed]
        for p in report.periods
    ]
    _write(
        Path(path),
        ["t", "model_psi", "exact_psi", "empirical_psi", "ci_halfwidth", "pass"],
        rows,
        timestamp,
    )


def write_sweep_csv(result: ExperimentResult, path: str | Path, timestamp: bool = True) -> None:
    """One row per grid point. Wall-time columns are zeroed when timestamps
    are suppressed so deterministic runs compare byte for byte."""
    rows = []
    for p in result.points:
        rows.append(
            [
                p.axis,
                p.status,
                p.networked_cost,
                p.independent_cost,
                p.min_model_psi,
                p.min_exact_psi,
                p.min_empirical_psi,
                p.min_empirical_psi_independent,
                round(p.networked_seconds, 3) if timestamp else 0.0,
                round(p.independent_seconds, 3) if timestamp else 0.0,
            ]
        )
    _write(
        Path(path),
        [
            result.axis_name,
            "status",
            "networked_cost",
            "independent_cost",
            "min_model_psi",
            "min_exact_psi",
            "min_empirical_psi",
            "min_empirical_psi_independent",
            "networked_seconds",
            "independent_seconds",
        ],
        rows,
        timestamp,
    )
