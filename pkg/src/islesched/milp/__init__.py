from .backend import BackendError, available_backends, solve
from .model import (
    Constraint,
    MilpModel,
    MilpSolution,
    ModelError,
    Variable,
    constraint_residuals,
    max_scaled_residual,
)
from .mps import MpsParseError, read_mps, render_mps, write_mps

__all__ = [
    "BackendError",
    "Constraint",
    "MilpModel",
    "MilpSolution",
    "ModelError",
    "MpsParseError",
    "Variable",
    "available_backends",
    "constraint_residuals",
    "max_scaled_residual",
    "read_mps",
    "render_mps",
    "solve",
    "write_mps",
]
