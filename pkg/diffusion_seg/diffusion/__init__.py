"""Diffusion engine: random walks, the cascade and closed-form oracles"""

from .cascade import (
    CascadeParams,
    CascadeState,
    cascade_step,
    run_cascade,
    walk_step,
)
from .oracle import closed_form, energy, fixed_point_residual, power_series
from .solvers import CascadeSolver, ClosedFormSolver, mean_transition

__all__ = [
    "CascadeParams",
    "CascadeSolver",
    "CascadeState",
    "ClosedFormSolver",
    "cascade_step",
    "closed_form",
    "energy",
    "fixed_point_residual",
    "mean_transition",
    "power_series",
    "run_cascade",
    "walk_step",
]
