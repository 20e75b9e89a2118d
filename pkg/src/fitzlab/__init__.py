"""Numerical laboratory for monotone operators and their convex representations."""

from .kernels import BACKEND
from .numerics import BoxGrid, ExtReal, GridFunction, ImproperFunctionError, OffGridError, grid_nodes, min_over_grid
from .reports import CheckReport, PreconditionError, ResolutionExhausted
from .spaces import DualityPair, SpaceSpec, dual_norm, dual_pair, duality_map, norm
from .operators import OperatorGraph, is_monotone
from .conjugation import biconjugate, flip_conjugate, legendre, translate
from .representations import fitzpatrick, s_function

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoxGrid",
    "ExtReal",
    "GridFunction",
    "ImproperFunctionError",
    "OffGridError",
    "grid_nodes",
    "min_over_grid",
    "CheckReport",
    "PreconditionError",
    "ResolutionExhausted",
    "DualityPair",
    "SpaceSpec",
    "dual_norm",
    "dual_pair",
    "duality_map",
    "norm",
    "OperatorGraph",
    "is_monotone",
    "biconjugate",
    "flip_conjugate",
    "legendre",
    "translate",
    "fitzpatrick",
    "s_function",
]
