"""Symmetric diagonal equilibration putting the spectrum of ``B + C`` in (0, 1]."""

from __future__ import annotations

import numpy as np

from .core import ComplexSymSystem, DimensionError, SparseSymMatrix

__all__ = ["compute_scaling", "apply_scaling", "unscale_solution"]


def compute_scaling(B: SparseSymMatrix, C: SparseSymMatrix) -> np.ndarray:
    """Scale factors ``s_i = (sum_j |M_ij|)^(-1/2)`` for ``M = B + C``.

    With ``S = diag(s)`` the matrix ``S M S`` is similar to ``S^2 M`` whose
    infinity norm is 1, so its eigenvalues lie in (0, 1] when ``M`` is SPD.
    Rows whose absolute sum is zero (zero padding) get ``s_i = 1``.
    """
    if B.n != C.n:
        raise DimensionError(f"B has size {B.n}, C has size {C.n}")
    rowsum = (B + C).abs_row_sums()
    s = np.ones(B.n)
    nz = rowsum > 0
    s[nz] = 1.0 / np.sqrt(rowsum[nz])
    return s


def apply_scaling(system: ComplexSymSystem, s) -> ComplexSymSystem:
    """Return the system ``(SBS + i SCS) w = S b``."""
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (system.n,):
        raise DimensionError(f"scaling has length {s.size}, system has size {system.n}")
    if not (np.all(np.isfinite(s)) and np.all(s > 0)):
        raise ValueError("scale factors must be positive and finite")
    return ComplexSymSystem(system.B.scaled(s), system.C.scaled(s), s * system.rhs)


def unscale_solution(w, s) -> np.ndarray:
    """Map a solution of the scaled system back: ``x = S w``."""
    w = np.asarray(w)
    s = np.asarray(s, dtype=np.float64)
    if w.shape != s.shape:
        raise DimensionError(f"solution has shape {w.shape}, scaling has shape {s.shape}")
    return s * w
