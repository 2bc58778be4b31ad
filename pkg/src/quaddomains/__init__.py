"""Numerical construction and auditing of planar quadrature domains."""

__version__ = "0.1.0"

from .circle_fourier import MeasureSpec, TrigPolynomial, herglotz_coeffs, project_x4, riesz_product
from .conformal import ConformalMapRecord, build_map, disk_map, geometry, map_from_taylor
from .disk_ops import PolarField, PolarGrid, balayage, operator_K, poisson_extend
from .dss import SolverConfig, solve_branch, solve_point
from .series import PowerSeries

__all__ = [
    "ConformalMapRecord",
    "MeasureSpec",
    "PolarField",
    "PolarGrid",
    "PowerSeries",
    "SolverConfig",
    "TrigPolynomial",
    "__version__",
    "balayage",
    "build_map",
    "disk_map",
    "geometry",
    "herglotz_coeffs",
    "map_from_taylor",
    "operator_K",
    "poisson_extend",
    "project_x4",
    "riesz_product",
    "solve_branch",
    "solve_point",
]
