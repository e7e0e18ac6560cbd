"""Real SPD solvers for ``M = B + C``, used to apply the exact MHSS step."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import DimensionError, SparseSymMatrix
from .krylov import Status, ic0_factorize, ic0_with_shift, pcg_real

__all__ = [
    "NotSPD",
    "InnerSolveFailure",
    "DENSE_LIMIT",
    "dense_cholesky_solve",
    "triangular_solves",
    "SpdSolver",
    "DenseCholesky",
    "SparseCholesky",
    "IC0Direct",
    "IC0PCG",
    "make_spd_solver",
]

DENSE_LIMIT = 2000


class NotSPD(np.linalg.LinAlgError):
    """Cholesky factorization hit a non-positive pivot."""


class InnerSolveFailure(RuntimeError):
    """An inner PCG solve did not reach its tolerance."""


def dense_cholesky_solve(M, v) -> np.ndarray:
    """Solve ``M z = v`` for dense SPD ``M`` by Cholesky."""
    M = np.asarray(M, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if M.shape[0] != v.shape[0]:
        raise DimensionError(f"matrix has size {M.shape[0]}, vector has length {v.shape[0]}")
    try:
        factor = sla.cho_factor(M, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPD(str(exc)) from exc
    return sla.cho_solve(factor, v)


def triangular_solves(L, v) -> np.ndarray:
    """Solve ``L L^T z = v`` by forward then backward substitution.

    ``L`` may be a sparse lower-triangular factor (real or complex) or a
    dense one.  The transpose is plain, never conjugated.
    """
    v = np.asarray(v)
    if sp.issparse(L):
        diag = L.diagonal()
        if np.any(diag == 0):
            raise ZeroDivisionError(f"zero diagonal in factor at row {int(np.argmin(abs(diag)))}")
        L = sp.csr_matrix(L)
        y = spla.spsolve_triangular(L, v, lower=True)
        return spla.spsolve_triangular(L.T.tocsr(), y, lower=False)
    L = np.asarray(L)
    if np.any(np.diag(L) == 0):
        raise ZeroDivisionError("zero diagonal in factor")
    y = sla.solve_triangular(L, v, lower=True)
    return sla.solve_triangular(L.T, y, lower=False)


@dataclass
class SpdSolver:
    """Base for solver handles: ``solve(v)`` returns ``M^{-1} v`` (approximately)."""

    M: SparseSymMatrix
    shift: float = 0.0
    solves: int = field(default=0, init=False)

    kind = "abstract"

    @property
    def n(self) -> int:
        return self.M.n

    def solve(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.n:
            raise DimensionError(f"solver has size {self.n}, right-hand side has {v.shape[0]}")
        self.solves += 1
        return self._solve(v)

    def _solve(self, v):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "shift": self.shift}


class DenseCholesky(SpdSolver):
    kind = "dense-cholesky"

    def __init__(self, M: SparseSymMatrix, dense_limit: int = DENSE_LIMIT):
        super().__init__(M)
        if M.n > dense_limit:
            raise ValueError(f"n = {M.n} exceeds the dense limit {dense_limit}")
        try:
            self._factor = sla.cho_factor(M.toarray(), lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotSPD(str(exc)) from exc

    def _solve(self, v):
        return sla.cho_solve(self._factor, v)


class SparseCholesky(SpdSolver):
    """Exact sparse solve through a fill-reducing LU of the SPD matrix."""

    kind = "sparse-direct"

    def __init__(self, M: SparseSymMatrix):
        super().__init__(M)
        try:
            self._lu = spla.splu(M.to_scipy().tocsc(), permc_spec="MMD_AT_PLUS_A",
                                 diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise NotSPD(str(exc)) from exc

    def _solve(self, v):
        return self._lu.solve(np.asarray(v, dtype=np.float64))


class IC0Direct(SpdSolver):
    """``(L L^T)^{-1} v`` with the zero-fill incomplete factor; approximate."""

    kind = "ic0-direct"

    def __init__(self, M: SparseSymMatrix, shifts=(0.0, 1e-3, 1e-2, 1e-1)):
        L, shift = ic0_with_shift(lambda shift: ic0_factorize(M, shift), shifts)
        super().__init__(M, shift)
        self.L = L
        self._Lt = L.T.tocsr()

    def _solve(self, v):
        y = spla.spsolve_triangular(self.L, v, lower=True)
        return spla.spsolve_triangular(self._Lt, y, lower=False)


class IC0PCG(IC0Direct):
    """PCG on ``M`` preconditioned by IC(0), stopped at a loose relative tolerance."""

    kind = "ic0-pcg"

    def __init__(self, M: SparseSymMatrix, tol: float = 1e-2, maxit: int = 500,
                 shifts=(0.0, 1e-3, 1e-2, 1e-1), strict: bool = False):
        super().__init__(M, shifts)
        self.tol = tol
        self.maxit = maxit
        self.strict = strict
        self.inner_iterations = 0

    def _solve(self, v):
        z, rep = pcg_real(self.M, v, precond=super()._solve, tol=self.tol, maxit=self.maxit)
        self.inner_iterations += rep.iterations
        if self.strict and rep.status is not Status.CONVERGED:
            raise InnerSolveFailure(f"inner PCG: {rep.status.value} after {rep.iterations} "
                                    f"iterations, relative residual {rep.relative_residual:.3e}")
        return z

    def describe(self) -> dict:
        return {**super().describe(), "tol": self.tol, "maxit": self.maxit,
                "inner_iterations": self.inner_iterations}


def make_spd_solver(M: SparseSymMatrix, kind: str = "auto", **kw) -> SpdSolver:
    """Build a solver handle by name.

    ``kind`` is one of ``dense-cholesky``, ``sparse-direct``, ``ic0-direct``,
    ``ic0-pcg`` or ``auto`` (dense Cholesky up to :data:`DENSE_LIMIT` rows,
    sparse direct above).
    """
    kinds = {
        "dense-cholesky": DenseCholesky,
        "sparse-direct": SparseCholesky,
        "ic0-direct": IC0Direct,
        "ic0-pcg": IC0PCG,
    }
    if kind == "auto":
        kind = "dense-cholesky" if M.n <= kw.pop("dense_limit", DENSE_LIMIT) else "sparse-direct"
    if kind not in kinds:
        raise ValueError(f"unknown SPD solver kind {kind!r}; choose from {sorted(kinds)}")
    return kinds[kind](M, **kw)
