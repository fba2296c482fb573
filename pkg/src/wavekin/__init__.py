"""Finite volume (sectional) solver for the isotropic mixed 3-/4-wave kinetic equation."""

from .collision import (
    OperatorContext,
    brute_force_rhs,
    lipschitz_estimate,
    positivity_flux_check,
    rhs,
    term_contributions,
)
from .dispersion import DispersionRelation, KernelParams
from .errors import (
    ConfigError,
    DimensionError,
    DomainError,
    GridError,
    NonFiniteError,
    WavekinError,
)
from .mesh import Grid, build_uniform_grid, locate_cell
from .simulation import SimConfig, observables, project_initial_condition, run, step

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "DispersionRelation",
    "DomainError",
    "Grid",
    "GridError",
    "KernelParams",
    "NonFiniteError",
    "OperatorContext",
    "SimConfig",
    "WavekinError",
    "brute_force_rhs",
    "build_uniform_grid",
    "lipschitz_estimate",
    "locate_cell",
    "observables",
    "positivity_flux_check",
    "project_initial_condition",
    "rhs",
    "run",
    "step",
    "term_contributions",
]
