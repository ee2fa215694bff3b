"""Independent verification of solved schedules.

Two instruments, neither sharing formulation code with the scheduler:

* a Monte Carlo estimator of the islanding success probability, sampling the
  correlated Gaussian error model directly and counting window hits; and
* a constraint auditor that re-evaluates every scheduling constraint family
  from the decoded schedule and the fleet data.

Sampling is seed-deterministic by construction: each (period, microgrid,
source) triple derives its own substream from the base seed, so the draws
never depend on how work is partitioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import uncertainty as unc
from .models import FleetSpec
from .scheduler.schedule import Schedule

DEFAULT_SAMPLES = 1_000_000
QUICK_SAMPLES = 10_000

# 99% two-sided normal quantile, for binomial confidence half-widths
_Z99 = 2.5758293035489004

_SOURCE_INDEX = {"wind": 0, "pv": 1, "demand": 2}


def _substream(seed: int, t: int, mg_index: int, source: str) -> np.random.Generator:
    key = np.random.SeedSequence(
        entropy=int(seed), spawn_key=(int(t), int(mg_index), _SOURCE_INDEX[source])
    )
    return np.random.Generator(np.random.PCG64(key))


def _corr_factor(corr: np.ndarray) -> np.ndarray:
    """Factor L with L L^T = corr. eigh-based so singular-but-PSD matrices
    (e.g. perfect correlation) factor cleanly."""
    w, v = np.linalg.eigh(0.5 * (corr + corr.T))
    if w.min() < -1e-8:
        raise ValueError(
            f"correlation matrix is not positive semidefinite (min eigenvalue {w.min():.3e})"
        )
    return v * np.sqrt(np.clip(w, 0.0, None))


_SIGN = {"wind": -1.0, "pv": -1.0, "demand": 1.0}


def sample_net_error_components(
    res: unc.ResolvedUncertainty, t: int, n: int, seed: int
) -> np.ndarray:
    """Draw n realizations of each microgrid's net error for period t,
    shape (n, N_M), with the configured cross-microgrid correlation per
    source. Summing over microgrids gives the fleet-total error."""
    if n < 1:
        raise ValueError("need at least one sample")
    n_m = res.n_microgrids
    out = np.zeros((n, n_m))
    for source in unc.SOURCES:
        z = np.empty((n, n_m))
        for i in range(n_m):
            z[:, i] = _substream(seed, t, i, source).standard_normal(n)
        factor = _corr_factor(res.corr[source])
        correlated = z @ factor.T
        for i in range(n_m):
            out[:, i] += _SIGN[source] * (
                res.mean[source][i, t] + res.sigma[source][i, t] * correlated[:, i]
            )
    return out


def sample_net_errors(
    res: unc.ResolvedUncertainty,
    t: int,
    n: int,
    seed: int,
    microgrid: str | None = None,
) -> np.ndarray:
    """Draw n realizations of the net demand forecast error for period t.

    With ``microgrid`` set, returns that microgrid's own error (marginal
    distribution, from its own substreams; used for independently scheduled
    microgrids). Otherwise returns the fleet-total error.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if microgrid is not None:
        idx = res.mg_index(microgrid)
        total = np.zeros(n)
        for source in unc.SOURCES:
            g = _substream(seed, t, idx, source)
            draws = res.mean[source][idx, t] + res.sigma[source][idx, t] * g.standard_normal(n)
            total += _SIGN[source] * draws
        return total
    return sample_net_error_components(res, t, n, seed).sum(axis=1)


def exact_interval_probability(lower: float, upper: float, mu: float, sigma: float) -> float:
    """Analytic probability mass of [lower, upper] under N(mu, sigma^2);
    deliberately its own implementation (scipy) rather than the scheduler's
    CDF helper."""
    if sigma < unc.SIGMA_DETERMINISTIC_KW:
        return 1.0 if lower <= mu <= upper else 0.0
    return float(stats.norm.cdf((upper - mu) / sigma) - stats.norm.cdf((lower - mu) / sigma))


@dataclass(frozen=True)
class PeriodPsi:
    t: int
    model_psi: float
    exact_psi: float
    empirical_psi: float
    ci_halfwidth: float
    passed: bool


@dataclass(frozen=True)
class ValidationReport:
    periods: list[PeriodPsi]
    sample_count: int
    seed: int
    psi_threshold: float  # empirical PSI must reach psi_req minus this margin
    residuals: dict[str, float] = field(default_factory=dict)
    audit_passed: bool = True

    @property
    def min_empirical_psi(self) -> float:
        return min(p.empirical_psi for p in self.periods)

    @property
    def min_exact_psi(self) -> float:
        return min(p.exact_psi for p in self.periods)

    @property
    def min_model_psi(self) -> float:
        return min(p.model_psi for p in self.periods)

    @property
    def psi_passed(self) -> bool:
        return all(p.passed for p in self.periods)

    @property
    def passed(self) -> bool:
        return self.psi_passed and self.audit_passed


def estimate_psi(
    schedule: Schedule,
    fleet: FleetSpec,
    n: int = DEFAULT_SAMPLES,
    seed: int = 20240601,
    psi_margin: float = 0.01,
    audit: bool = True,
) -> ValidationReport:
    """Monte Carlo check of a schedule's islanding probability, period by
    period, against the schedule's own PSI requirement.

    The window endpoints come from the schedule's reserves and PCC exchange;
    the error model is re-resolved from the fleet rather than trusted from
    the schedule. The exact (analytic) PSI is reported alongside.
    """
    res = unc.resolve_uncertainty(fleet)
    mg_ids = [m.id for m in schedule.microgrids]
    single = schedule.mode == "independent"
    if single and len(mg_ids) != 1:
        raise ValueError("independent schedules carry exactly one microgrid")
    dist = unc.net_error_distribution(
        fleet, mode="independent" if single else "networked",
        microgrid=mg_ids[0] if single else None, resolved=res,
    )
    periods: list[PeriodPsi] = []
    for t in range(schedule.n_periods):
        ru = schedule.reserve_up_total(t)
        rd = schedule.reserve_dn_total(t)
        pcc = schedule.pcc_total(t)
        upper = ru - pcc
        lower = -rd - pcc
        exact = exact_interval_probability(lower, upper, float(dist.mu[t]), float(dist.sigma[t]))
        if single:
            draws = sample_net_errors(res, t, n, seed, microgrid=mg_ids[0])
        else:
            draws = sample_net_errors(res, t, n, seed)
        hits = np.count_nonzero((draws >= lower) & (draws <= upper))
        empirical = hits / n
        half = _Z99 * math.sqrt(max(empirical * (1.0 - empirical), 0.0) / n)
        periods.append(
            PeriodPsi(
                t=t,
                model_psi=schedule.psi_model[t],
                exact_psi=exact,
                empirical_psi=empirical,
                ci_halfwidth=half,
                passed=empirical >= schedule.psi_req - psi_margin,
            )
        )
    residuals: dict[str, float] = {}
    audit_ok = True
    if audit:
        report = audit_schedule(schedule, fleet)
        residuals = report.family_max
        audit_ok = report.passed
    return ValidationReport(
        periods=periods,
        sample_count=n,
        seed=seed,
        psi_threshold=psi_margin,
        residuals=residuals,
        audit_passed=audit_ok,
    )


@dataclass(frozen=True)
class AuditReport:
    """Constraint-family residual maxima plus itemized violations beyond
    tolerance."""

    family_max: dict[str, float]
    violations: list[str]
    tolerance: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def worst(self) -> tuple[str, float]:
        name = max(self.family_max, key=lambda k: self.family_max[k])
        return name, self.family_max[name]


def audit_schedule(schedule: Schedule, fleet: FleetSpec, tolerance: float = 1e-6) -> AuditReport:
    """Re-evaluate every constraint family directly from schedule values.

    Residuals are violation amounts (zero when satisfied) scaled per family
    by max(1, |reference magnitude|). Covers dispatch/commitment coupling,
    reserve caps, battery operation, the SOC recursion, energy balance,
    integrality and minimum up/down times.
    """
    fam: dict[str, float] = {}
    violations: list[str] = []
    dt, tau = schedule.dt, fleet.tau

    def record(family: str, where: str, amount: float, scale: float = 1.0) -> None:
        scaled = amount / max(1.0, abs(scale))
        fam[family] = max(fam.get(family, 0.0), scaled)
        if scaled > tolerance:
            violations.append(f"{family} at {where}: residual {scaled:.3e}")

    for mgs in schedule.microgrids:
        mg = fleet.microgrid(mgs.id)
        units = {u.id: u for u in mg.units}
        bats = {b.id: b for b in mg.batteries}
        for us in mgs.units:
            u = units[us.id]
            where = f"{mgs.id}.{us.id}"
            for t in range(schedule.n_periods):
                on = us.committed[t]
                record("integrality", f"{where},t={t}", abs(on - round(on)))
                p, blocks = us.power[t], us.block_power[t]
                record(
                    "block_sum", f"{where},t={t}",
                    abs(p - (sum(blocks) + on * u.p_min)), u.p_max,
                )
                for m, (blk, val) in enumerate(zip(u.offer_blocks, blocks)):
                    record("block_bounds", f"{where},t={t},m={m}",
                           max(0.0, -val, val - blk.width), blk.width)
                record("commit_window", f"{where},t={t}",
                       max(0.0, u.p_min * on - p, p - u.p_max * on), u.p_max)
                record("reserve_up_cap", f"{where},t={t}",
                       max(0.0,
                           us.reserve_up[t] - (u.p_max * on - p),
                           us.reserve_up[t] - u.ramp_up_rate * tau * on),
                       u.p_max)
                record("reserve_dn_cap", f"{where},t={t}",
                       max(0.0,
                           us.reserve_dn[t] - (p - u.p_min * on),
                           us.reserve_dn[t] - u.ramp_down_rate * tau * on),
                       u.p_max)
                record("reserve_nonneg", f"{where},t={t}",
                       max(0.0, -us.reserve_up[t], -us.reserve_dn[t]))
            _audit_min_up_down(u, us.committed, where, record)
        for bs in mgs.batteries:
            b = bats[bs.id]
            where = f"{mgs.id}.{bs.id}"
            soc_prev = b.soc_initial
            for t in range(schedule.n_periods):
                uc, ud = bs.charging[t], bs.discharging[t]
                record("integrality", f"{where},t={t}",
                       max(abs(uc - round(uc)), abs(ud - round(ud))))
                record("charge_cap", f"{where},t={t}",
                       max(0.0, -bs.charge_power[t],
                           bs.charge_power[t] - b.p_charge_max * uc), b.p_charge_max)
                record("discharge_cap", f"{where},t={t}",
                       max(0.0, -bs.discharge_power[t],
                           bs.discharge_power[t] - b.p_discharge_max * ud), b.p_discharge_max)
                record("charge_xor", f"{where},t={t}", max(0.0, uc + ud - 1.0))
                expected = soc_prev + b.eta_c * dt * bs.charge_power[t] \
                    - dt / b.eta_d * bs.discharge_power[t]
                record("soc_recursion", f"{where},t={t}",
                       abs(bs.soc[t] - expected), b.soc_max)
                record("soc_window", f"{where},t={t}",
                       max(0.0, b.soc_min - bs.soc[t], bs.soc[t] - b.soc_max), b.soc_max)
                record("net_power", f"{where},t={t}",
                       abs(bs.net_power[t] - (bs.discharge_power[t] - bs.charge_power[t])),
                       b.p_discharge_max)
                record("bat_reserve_up_cap", f"{where},t={t}",
                       max(0.0,
                           bs.reserve_up[t] - (b.p_discharge_max - bs.net_power[t]),
                           bs.reserve_up[t] - b.eta_d * (bs.soc[t] - b.soc_min) / tau),
                       b.p_discharge_max)
                record("bat_reserve_dn_cap", f"{where},t={t}",
                       max(0.0,
                           bs.reserve_dn[t] - (b.p_charge_max + bs.net_power[t]),
                           bs.reserve_dn[t] - (b.soc_max - bs.soc[t]) / (b.eta_c * tau)),
                       b.p_charge_max)
                record("reserve_nonneg", f"{where},t={t}",
                       max(0.0, -bs.reserve_up[t], -bs.reserve_dn[t]))
                soc_prev = bs.soc[t]
            if b.soc_terminal_min is not None:
                record("soc_terminal", where,
                       max(0.0, b.soc_terminal_min - bs.soc[-1]), b.soc_max)
        for t, pcc in enumerate(mgs.pcc):
            record("pcc_bounds", f"{mgs.id},t={t}",
                   max(0.0, pcc - float(mg.pcc_import_max or 0.0),
                       -pcc - float(mg.pcc_export_max or 0.0)),
                   max(float(mg.pcc_import_max or 0.0), float(mg.pcc_export_max or 0.0)))

    for t in range(schedule.n_periods):
        injection = 0.0
        demand = 0.0
        for mgs in schedule.microgrids:
            mg = fleet.microgrid(mgs.id)
            injection += sum(us.power[t] for us in mgs.units)
            injection += sum(bs.discharge_power[t] - bs.charge_power[t] for bs in mgs.batteries)
            injection += mgs.pcc[t] + mg.wind_forecast[t] + mg.pv_forecast[t]
            demand += mg.demand_forecast[t]
        record("energy_balance", f"t={t}", abs(injection - demand), demand)

    return AuditReport(family_max=fam, violations=violations, tolerance=tolerance)


def _audit_min_up_down(u, committed: list[int], where: str, record) -> None:
    """Scan the commitment pattern for stretches shorter than the minimum,
    honoring the initial condition; horizon-truncated stretches are fine."""
    n_t = len(committed)
    state = 1 if u.initially_on else 0
    run = u.initial_on_periods if state else u.initial_off_periods
    start = 0
    seq = [int(round(x)) for x in committed] + [None]
    for t, on in enumerate(seq):
        if on is not None and on == state:
            run += 1
            continue
        # stretch ended at t-1 (or horizon end); truncation is not a violation
        if on is not None:
            needed = u.min_up if state == 1 else u.min_down
            if run < needed:
                kind = "min_up" if state == 1 else "min_down"
                record(kind, f"{where},t={start}",
                       float(needed - run))
            state, run, start = on, 1, t
