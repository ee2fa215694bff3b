"""Gaussian forecast-error math: exact normal CDF, piecewise-linear CDF
approximation for MILP embedding, correlation-aware variance aggregation,
and exact evaluation of the probability of successful islanding (PSI).

All power quantities are in kW; z-values are in standard-deviation units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .models import FleetSpec, SourceMean, SourceSigma

SOURCES = ("wind", "pv", "demand")

# Below this sigma (kW) a net-error distribution is treated as deterministic.
SIGMA_DETERMINISTIC_KW = 1e-9

_SQRT2 = math.sqrt(2.0)


def phi(z: float) -> float:
    """Standard normal CDF, accurate to well below 1e-10 absolute."""
    if not math.isfinite(z):
        raise ValueError(f"phi requires finite z, got {z}")
    # erfc keeps full relative accuracy in the lower tail
    return 0.5 * math.erfc(-z / _SQRT2)


def aggregate_sigma(sigmas: np.ndarray, corr: np.ndarray) -> float:
    """Standard deviation of a sum of correlated components.

    Returns sqrt(sum_n sum_n' corr[n,n'] * sigma_n * sigma_n').
    Rejects dimension mismatches and non-PSD correlation matrices outright;
    a silently repaired matrix would desynchronize the scheduler's sigma
    from the Monte Carlo sampler.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    corr = np.asarray(corr, dtype=float)
    n = sigmas.shape[0]
    if corr.shape != (n, n):
        raise ValueError(f"correlation matrix shape {corr.shape} does not match {n} sigmas")
    problems = check_correlation_matrix(corr)
    if problems:
        raise ValueError("; ".join(problems))
    var = float(sigmas @ corr @ sigmas)
    # PSD guarantees var >= 0 up to roundoff
    return math.sqrt(max(var, 0.0))


def check_correlation_matrix(corr: np.ndarray, tol: float = 1e-8) -> list[str]:
    """Validate symmetry, unit diagonal, entry range and positive
    semidefiniteness. Returns a list of problem descriptions (empty if valid)
    and raises ValueError on non-PSD since downstream sampling cannot proceed.
    """
    corr = np.asarray(corr, dtype=float)
    problems: list[str] = []
    if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
        raise ValueError(f"correlation matrix must be square, got shape {corr.shape}")
    if not np.allclose(corr, corr.T, atol=tol):
        problems.append("correlation matrix is not symmetric")
    if not np.allclose(np.diag(corr), 1.0, atol=tol):
        problems.append("correlation matrix diagonal is not 1")
    if np.any(np.abs(corr) > 1.0 + tol):
        problems.append("correlation entries must lie in [-1, 1]")
    if not problems:
        w = np.linalg.eigvalsh(0.5 * (corr + corr.T))
        if w.min() < -tol:
            raise ValueError(
                f"correlation matrix is not positive semidefinite (min eigenvalue {w.min():.3e})"
            )
    return problems


@dataclass(frozen=True)
class NetErrorDistribution:
    """Per-period distribution of the net demand forecast error (kW):
    demand error minus wind and PV errors, Gaussian by assumption.
    """

    mu: np.ndarray  # (N_T,)
    sigma: np.ndarray  # (N_T,) all >= 0

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if mu.shape != sigma.shape:
            raise ValueError("mu and sigma must have equal length")
        if np.any(sigma < 0):
            raise ValueError("sigma must be nonnegative")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def n_periods(self) -> int:
        return self.mu.shape[0]


def psi_exact(ru_total: float, rd_total: float, p_pcc: float, mu: float, sigma: float) -> float:
    """Probability that the net error lands inside the reserve window.

    The window is [-rd_total - p_pcc, ru_total - p_pcc]: after instant
    islanding the up-reserve must absorb positive net error plus the lost
    import, and the down-reserve the mirror case.
    """
    if ru_total < 0 or rd_total < 0:
        raise ValueError("reserve totals must be nonnegative")
    upper = ru_total - p_pcc
    lower = -rd_total - p_pcc
    if sigma < SIGMA_DETERMINISTIC_KW:
        return 1.0 if lower <= mu <= upper else 0.0
    return phi((upper - mu) / sigma) - phi((lower - mu) / sigma)


@dataclass(frozen=True)
class PwlCdf:
    """Chord (secant) piecewise-linear approximation of the standard normal
    CDF on [-z_max, z_max], clamped to the endpoint values outside.

    breakpoints[l], values[l] = Phi(breakpoints[l]); slopes[l] is the chord
    slope on (breakpoints[l], breakpoints[l+1]).
    """

    breakpoints: np.ndarray  # (n_segments + 1,)
    values: np.ndarray  # (n_segments + 1,)
    slopes: np.ndarray = field(init=False)  # (n_segments,)

    def __post_init__(self) -> None:
        bps = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bps.ndim != 1 or bps.shape != vals.shape or bps.shape[0] < 3:
            raise ValueError("need matching 1-D breakpoints/values with at least 2 segments")
        if np.any(np.diff(bps) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        slopes = np.diff(vals) / np.diff(bps)
        if np.any(slopes < 0):
            raise ValueError("CDF chord slopes must be nonnegative")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "slopes", slopes)

    @property
    def n_segments(self) -> int:
        return self.breakpoints.shape[0] - 1

    @property
    def z_max(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def max_probability_window(self) -> float:
        """Largest representable CDF difference: Phi(z_max) - Phi(-z_max)."""
        return float(self.values[-1] - self.values[0])

    def evaluate(self, z: float) -> float:
        """Chord interpolation with clamped tails."""
        bps = self.breakpoints
        if z <= bps[0]:
            return float(self.values[0])
        if z >= bps[-1]:
            return float(self.values[-1])
        l = int(np.searchsorted(bps, z, side="right")) - 1
        return float(self.values[l] + self.slopes[l] * (z - bps[l]))

    def max_chord_error_bound(self) -> float:
        """A priori bound on |chord - Phi|: h^2/8 * max|Phi''| per segment,
        where |Phi''(z)| = |z| pdf(z) peaks at z = 1.
        """
        h = float(np.max(np.diff(self.breakpoints)))
        max_curvature = math.exp(-0.5) / math.sqrt(2.0 * math.pi)
        return h * h / 8.0 * max_curvature


def build_pwl_cdf(n_segments: int = 32, z_max: float = 4.0) -> PwlCdf:
    """Uniform chord interpolation of Phi on [-z_max, z_max].

    n_segments must be even (so z = 0 is a breakpoint and symmetry
    Phi(-z) = 1 - Phi(z) carries over exactly) and at least 2.
    """
    if n_segments < 2 or n_segments % 2 != 0:
        raise ValueError("n_segments must be an even integer >= 2")
    if z_max <= 0:
        raise ValueError("z_max must be positive")
    bps = np.linspace(-z_max, z_max, n_segments + 1)
    vals = np.array([phi(z) for z in bps])
    return PwlCdf(breakpoints=bps, values=vals)


def psi_pwl(pwl: PwlCdf, ru_total: float, rd_total: float, p_pcc: float,
            mu: float, sigma: float) -> float:
    """PSI as the scheduler's linearized model sees it: the chord CDF
    evaluated at both window endpoints. Deterministic sigmas fall back to
    the exact indicator.
    """
    if sigma < SIGMA_DETERMINISTIC_KW:
        return psi_exact(ru_total, rd_total, p_pcc, mu, sigma)
    z_hi = (ru_total - p_pcc - mu) / sigma
    z_lo = (-rd_total - p_pcc - mu) / sigma
    return pwl.evaluate(z_hi) - pwl.evaluate(z_lo)


@dataclass(frozen=True)
class ResolvedUncertainty:
    """Uncertainty model with every source expanded to absolute kW arrays.

    sigma/mean are keyed by source name with (N_M, N_T) arrays in fleet
    microgrid order; corr holds an (N_M, N_M) matrix per source.
    """

    microgrid_ids: tuple[str, ...]
    sigma: dict[str, np.ndarray]
    mean: dict[str, np.ndarray]
    corr: dict[str, np.ndarray]

    @property
    def n_microgrids(self) -> int:
        return len(self.microgrid_ids)

    @property
    def n_periods(self) -> int:
        return self.sigma["wind"].shape[1]

    def mg_index(self, mg_id: str) -> int:
        try:
            return self.microgrid_ids.index(mg_id)
        except ValueError:
            raise KeyError(f"no microgrid with id {mg_id!r}") from None


def _expand_sigma(spec: SourceSigma, source: str, fleet: FleetSpec) -> np.ndarray:
    n_m, n_t = fleet.n_microgrids, fleet.n_periods
    if spec.form_count() != 1:
        raise ValueError(
            f"uncertainty.{source}_sigma: exactly one of fraction/value/series required"
        )
    out = np.zeros((n_m, n_t))
    forecast_attr = {"wind": "wind_forecast", "pv": "pv_forecast", "demand": "demand_forecast"}
    for n, mg in enumerate(fleet.microgrids):
        if spec.fraction is not None:
            out[n] = spec.fraction * np.asarray(getattr(mg, forecast_attr[source]), dtype=float)
        elif spec.value is not None:
            out[n] = spec.value
        else:
            assert spec.series is not None
            if mg.id not in spec.series:
                raise ValueError(f"uncertainty.{source}_sigma.series: missing microgrid {mg.id!r}")
            row = np.asarray(spec.series[mg.id], dtype=float)
            if row.shape[0] != n_t:
                raise ValueError(
                    f"uncertainty.{source}_sigma.series[{mg.id!r}]: length {row.shape[0]} != {n_t}"
                )
            out[n] = row
    if np.any(out < 0):
        raise ValueError(f"uncertainty.{source}_sigma: negative std dev")
    return out


def _expand_mean(spec: SourceMean | None, source: str, fleet: FleetSpec) -> np.ndarray:
    n_m, n_t = fleet.n_microgrids, fleet.n_periods
    out = np.zeros((n_m, n_t))
    if spec is None:
        return out
    for n, mg in enumerate(fleet.microgrids):
        if spec.series is not None:
            if mg.id not in spec.series:
                raise ValueError(f"uncertainty.{source}_mean.series: missing microgrid {mg.id!r}")
            row = np.asarray(spec.series[mg.id], dtype=float)
            if row.shape[0] != n_t:
                raise ValueError(
                    f"uncertainty.{source}_mean.series[{mg.id!r}]: length {row.shape[0]} != {n_t}"
                )
            out[n] = row
        elif spec.value is not None:
            out[n] = spec.value
    return out


def _expand_corr(matrix: list[list[float]] | None, source: str, n_m: int) -> np.ndarray:
    if matrix is None:
        return np.eye(n_m)
    corr = np.asarray(matrix, dtype=float)
    if corr.shape != (n_m, n_m):
        raise ValueError(
            f"uncertainty.corr_{source}: shape {corr.shape} does not match {n_m} microgrids"
        )
    problems = check_correlation_matrix(corr)
    if problems:
        raise ValueError(f"uncertainty.corr_{source}: " + "; ".join(problems))
    return corr


def resolve_uncertainty(fleet: FleetSpec) -> ResolvedUncertainty:
    """Expand fractions/constants/series into absolute per-(microgrid, period)
    arrays and materialize correlation matrices. Raises ValueError naming the
    offending field on any dimension or validity problem.
    """
    u = fleet.uncertainty
    sigma = {
        "wind": _expand_sigma(u.wind_sigma, "wind", fleet),
        "pv": _expand_sigma(u.pv_sigma, "pv", fleet),
        "demand": _expand_sigma(u.demand_sigma, "demand", fleet),
    }
    mean = {
        "wind": _expand_mean(u.wind_mean, "wind", fleet),
        "pv": _expand_mean(u.pv_mean, "pv", fleet),
        "demand": _expand_mean(u.demand_mean, "demand", fleet),
    }
    n_m = fleet.n_microgrids
    corr = {
        "wind": _expand_corr(u.corr_wind, "wind", n_m),
        "pv": _expand_corr(u.corr_pv, "pv", n_m),
        "demand": _expand_corr(u.corr_demand, "demand", n_m),
    }
    return ResolvedUncertainty(
        microgrid_ids=tuple(mg.id for mg in fleet.microgrids),
        sigma=sigma,
        mean=mean,
        corr=corr,
    )


def net_error_distribution(
    fleet: FleetSpec,
    mode: str | None = None,
    microgrid: str | None = None,
    resolved: ResolvedUncertainty | None = None,
) -> NetErrorDistribution:
    """Distribution of the net demand forecast error, per period.

    Net error = demand error - wind error - pv error; the three sources are
    mutually independent, so their variances add. In networked mode each
    source is first aggregated across microgrids with its correlation
    matrix; in independent mode a microgrid id selects one row.
    """
    res = resolved if resolved is not None else resolve_uncertainty(fleet)
    mode = mode or fleet.mode
    n_t = res.n_periods
    if mode == "independent":
        if microgrid is None:
            if res.n_microgrids == 1:
                microgrid = res.microgrid_ids[0]
            else:
                raise ValueError("independent mode requires a microgrid id")
        n = res.mg_index(microgrid)
        var = sum(res.sigma[s][n] ** 2 for s in SOURCES)
        mu = res.mean["demand"][n] - res.mean["wind"][n] - res.mean["pv"][n]
        return NetErrorDistribution(mu=mu, sigma=np.sqrt(var))
    if mode != "networked":
        raise ValueError(f"unknown mode {mode!r}")
    var = np.zeros(n_t)
    for s in SOURCES:
        check_correlation_matrix(res.corr[s])
        for t in range(n_t):
            var[t] += float(res.sigma[s][:, t] @ res.corr[s] @ res.sigma[s][:, t])
    var = np.maximum(var, 0.0)
    mu = (res.mean["demand"] - res.mean["wind"] - res.mean["pv"]).sum(axis=0)
    return NetErrorDistribution(mu=mu, sigma=np.sqrt(var))
