"""Effective-reservoir dimension of open quantum dynamics.

Closed-form complexity estimates, timeline reservoir networks for checking
the underlying entropy bounds, an exactly solvable band model and
low-dimensional GKSL surrogates fitted to it.
"""

from __future__ import annotations

__version__ = "0.1.0"

from ._backend import BACKEND
from .complexity import ComplexityEstimate, PhysicalParams, effective_dimension, heatmap, sufficient_rank
from .errors import (
    DomainError,
    ErdimError,
    NumericalError,
    ObjectiveError,
    RangeError,
    ShapeError,
    SizeError,
    StepError,
    ValidationError,
)
from .exact_model import ExactModel, derived_params, solve_continuum, solve_finite
from .fitting import FitResult, fit_embedding, fit_markov, nelder_mead
from .lindblad import GkslGenerator, Trajectory, build_superoperator, propagate
from .trotter_trn import CoupledModel, TimelineMps, build_trn, build_trotter_layers, truncate

__all__ = [
    "BACKEND",
    "ComplexityEstimate",
    "CoupledModel",
    "DomainError",
    "ErdimError",
    "ExactModel",
    "FitResult",
    "GkslGenerator",
    "NumericalError",
    "ObjectiveError",
    "PhysicalParams",
    "RangeError",
    "ShapeError",
    "SizeError",
    "StepError",
    "TimelineMps",
    "Trajectory",
    "ValidationError",
    "build_superoperator",
    "build_trn",
    "build_trotter_layers",
    "derived_params",
    "effective_dimension",
    "fit_embedding",
    "fit_markov",
    "heatmap",
    "nelder_mead",
    "propagate",
    "solve_continuum",
    "solve_finite",
    "sufficient_rank",
    "truncate",
]
