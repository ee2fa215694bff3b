from .build import BuildError, DecodeInfo, build_milp, decode_solution
from .schedule import (
    BatterySchedule,
    CostBreakdown,
    MicrogridSchedule,
    Schedule,
    UnitSchedule,
    compute_cost_breakdown,
)
from .solve import (
    InfeasibleError,
    SolveError,
    single_microgrid_fleet,
    solve_independent_set,
    solve_schedule,
)

__all__ = [
    "BatterySchedule",
    "BuildError",
    "CostBreakdown",
    "DecodeInfo",
    "InfeasibleError",
    "MicrogridSchedule",
    "Schedule",
    "SolveError",
    "UnitSchedule",
    "build_milp",
    "compute_cost_breakdown",
    "decode_solution",
    "single_microgrid_fleet",
    "solve_independent_set",
    "solve_schedule",
]
