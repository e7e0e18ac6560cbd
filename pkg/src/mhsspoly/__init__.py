"""Polynomial MHSS preconditioners with COCG/COCR for complex symmetric systems."""

from .core import (ComplexSymSystem, DimensionError, SparseSymMatrix, apply_A, bilinear,
                   set_num_threads)
from .krylov import SolveReport, Status, cocg, cocr
from .mhss import mhss_apply_exact, mhss_solve
from .orthopoly import make_coeffs
from .polyprecond import apply_polynomial_P_inverse, apply_sm
from .precond import PRECONDITIONERS, Preconditioner, build_preconditioner
from .scaling import apply_scaling, compute_scaling, unscale_solution

__version__ = "0.1.0"

__all__ = [
    "ComplexSymSystem",
    "DimensionError",
    "SparseSymMatrix",
    "apply_A",
    "bilinear",
    "set_num_threads",
    "SolveReport",
    "Status",
    "cocg",
    "cocr",
    "mhss_apply_exact",
    "mhss_solve",
    "make_coeffs",
    "apply_polynomial_P_inverse",
    "apply_sm",
    "PRECONDITIONERS",
    "Preconditioner",
    "build_preconditioner",
    "apply_scaling",
    "compute_scaling",
    "unscale_solution",
]
