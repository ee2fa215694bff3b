"""Chance-constrained day-ahead scheduling for single and networked
microgrids, with Monte Carlo validation of the islanding probability."""

from .fleet_io import FleetConfigError, load_fleet, save_fleet, validate_fleet
from .models import (
    BatterySpec,
    DispatchableUnit,
    FleetSpec,
    MicrogridSpec,
    OfferBlock,
    UncertaintyModel,
)
from .scheduler import (
    InfeasibleError,
    Schedule,
    SolveError,
    build_milp,
    solve_independent_set,
    solve_schedule,
)
from .uncertainty import (
    NetErrorDistribution,
    PwlCdf,
    aggregate_sigma,
    build_pwl_cdf,
    net_error_distribution,
    phi,
    psi_exact,
)
from .validation import (
    ValidationReport,
    audit_schedule,
    estimate_psi,
    sample_net_error_components,
    sample_net_errors,
)

__all__ = [
    "BatterySpec",
    "DispatchableUnit",
    "FleetConfigError",
    "FleetSpec",
    "InfeasibleError",
    "MicrogridSpec",
    "NetErrorDistribution",
    "OfferBlock",
    "PwlCdf",
    "Schedule",
    "SolveError",
    "UncertaintyModel",
    "ValidationReport",
    "aggregate_sigma",
    "audit_schedule",
    "build_milp",
    "build_pwl_cdf",
    "estimate_psi",
    "load_fleet",
    "net_error_distribution",
    "phi",
    "psi_exact",
    "sample_net_error_components",
    "sample_net_errors",
    "save_fleet",
    "solve_independent_set",
    "solve_schedule",
    "validate_fleet",
]
