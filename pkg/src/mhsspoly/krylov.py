"""
COCG / COCR for complex symmetric systems, real PCG, and IC(0) factorizations.

Both complex solvers use the unconjugated form ``[u, v] = u^T v`` and take the
preconditioner as a callable ``r -> P^{-1} r``; see
:mod:`mhsspoly.precond` for the available ones.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .core import SparseSymMatrix

__all__ = [
    "Status",
    "SolveReport",
    "PivotBreakdown",
    "cocg",
    "cocr",
    "pcg_real",
    "ic0_factorize",
    "complex_ic0",
    "ic0_with_shift",
    "BREAKDOWN_TOL",
    "DEFAULT_TOL",
    "DEFAULT_MAXIT",
]

BREAKDOWN_TOL = 1e-30
DEFAULT_TOL = 1e-8
DEFAULT_MAXIT = 5000


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    NOT_CONVERGED = "NotConverged"
    BREAKDOWN = "Breakdown"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class SolveReport:
    status: Status
    residual_history: list
    rhs_norm: float
    wall_time: float = 0.0
    matvec_count: int = 0
    precond_applications: int = 0
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.residual_history) - 1

    @property
    def relative_residual(self) -> float:
        if self.rhs_norm == 0:
            return 0.0
        return self.residual_history[-1] / self.rhs_norm

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def as_dict(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "relative_residual": self.relative_residual,
            "rhs_norm": self.rhs_norm,
            "wall_time": self.wall_time,
            "matvec_count": self.matvec_count,
            "precond_applications": self.precond_applications,
            "message": self.message,
            "residual_history": [float(r) for r in self.residual_history],
            **self.extra,
        }


class PivotBreakdown(ArithmeticError):
    """Non-positive (or vanishing complex) pivot in an incomplete factorization."""

    def __init__(self, row: int, pivot):
        super().__init__(f"pivot breakdown at row {row}: pivot = {pivot}")
        self.row = row
        self.pivot = pivot


def _identity(r):
    return r.copy()


def _bil(u, v):
    return np.dot(u, v)


# -- complex symmetric Krylov solvers ---------------------------------------


def cocg(A: Callable, b, precond: Optional[Callable] = None, tol: float = DEFAULT_TOL,
         maxit: int = DEFAULT_MAXIT, x0=None, *,
         breakdown_tol: float = BREAKDOWN_TOL) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate orthogonal conjugate gradients.

    Parameters
    ----------
    A : callable
        ``x -> A @ x`` for a complex symmetric ``A``.
    b : array_like
        Right-hand side.
    precond : callable, optional
        ``r -> P^{-1} r`` with ``P`` complex symmetric.  Identity if omitted.
    tol : float
        Stop once ``||r|| <= tol * ||b||`` on the recursively updated residual.
    maxit : int
        Iteration cap.
    x0 : array_like, optional
        Initial guess, zero by default.

    Returns
    -------
    x : ndarray
    report : SolveReport
    """
    _check_args(tol, maxit)
    P = precond or _identity
    b = np.asarray(b, dtype=np.complex128)
    t0 = time.perf_counter()
    nmv = npc = 0
    bnorm = float(np.linalg.norm(b))
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=np.complex128)
        r = b - A(x)
        nmv += 1
    hist = [float(np.linalg.norm(r))]

    best = _BestIterate(x, hist[0])

    def done(status, msg=""):
        xr = x if status is Status.CONVERGED else best.pick(x, hist[-1])
        return xr, SolveReport(status, hist, bnorm, time.perf_counter() - t0, nmv, npc, msg)

    if hist[0] <= tol * bnorm:
        return done(Status.CONVERGED)
    rt = P(r)
    npc += 1
    p = rt.copy()
    rho = _bil(rt, r)
    if abs(rho) <= breakdown_tol * np.linalg.norm(rt) * hist[-1]:
        return done(Status.BREAKDOWN, "rho = [P^-1 r, r] vanished at start")
    for it in range(1, maxit + 1):
        q = A(p)
        nmv += 1
        mu = _bil(q, p)
        if not np.isfinite(mu):
            return done(Status.NUMERICAL_FAILURE, f"non-finite [q, p] at iteration {it}")
        if abs(mu) <= breakdown_tol * np.linalg.norm(q) * np.linalg.norm(p):
            return done(Status.BREAKDOWN, f"mu = [q, p] vanished at iteration {it}")
        with np.errstate(over="ignore", invalid="ignore"):
            alpha = rho / mu
        if not np.isfinite(alpha):
            return done(Status.NUMERICAL_FAILURE, f"step length overflowed at iteration {it}")
        x += alpha * p
        r -= alpha * q
        rn = float(np.linalg.norm(r))
        hist.append(rn)
        if not np.isfinite(rn):
            return done(Status.NUMERICAL_FAILURE, f"non-finite residual at iteration {it}")
        if rn <= tol * bnorm:
            return done(Status.CONVERGED)
        best.offer(x, rn)
        rt = P(r)
        npc += 1
        beta = rho
        rho = _bil(rt, r)
        if abs(rho) <= breakdown_tol * np.linalg.norm(rt) * rn:
            return done(Status.BREAKDOWN, f"rho = [P^-1 r, r] vanished at iteration {it}")
        beta = rho / beta
        p = rt + beta * p
    return done(Status.NOT_CONVERGED, f"no convergence in {maxit} iterations")


def cocr(A: Callable, b, precond: Optional[Callable] = None, tol: float = DEFAULT_TOL,
         maxit: int = DEFAULT_MAXIT, x0=None, *,
         breakdown_tol: float = BREAKDOWN_TOL) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate orthogonal conjugate residuals.

    Same interface as :func:`cocg`.  Each iteration costs one product with
    ``A`` and one preconditioner application.
    """
    _check_args(tol, maxit)
    P = precond or _identity
    b = np.asarray(b, dtype=np.complex128)
    t0 = time.perf_counter()
    nmv = npc = 0
    bnorm = float(np.linalg.norm(b))
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=np.complex128)
        r = b - A(x)
        nmv += 1
    hist = [float(np.linalg.norm(r))]

    best = _BestIterate(x, hist[0])

    def done(status, msg=""):
        xr = x if status is Status.CONVERGED else best.pick(x, hist[-1])
        return xr, SolveReport(status, hist, bnorm, time.perf_counter() - t0, nmv, npc, msg)

    if hist[0] <= tol * bnorm:
        return done(Status.CONVERGED)
    rt = P(r)
    npc += 1
    p = rt.copy()
    q = A(p)
    nmv += 1
    rho = _bil(rt, q)
    if abs(rho) <= breakdown_tol * np.linalg.norm(rt) * np.linalg.norm(q):
        return done(Status.BREAKDOWN, "rho = [P^-1 r, A p] vanished at start")
    for it in range(1, maxit + 1):
        qt = P(q)
        npc += 1
        mu = _bil(qt, q)
        if not np.isfinite(mu):
            return done(Status.NUMERICAL_FAILURE, f"non-finite [P^-1 q, q] at iteration {it}")
        if abs(mu) <= breakdown_tol * np.linalg.norm(qt) * np.linalg.norm(q):
            return done(Status.BREAKDOWN, f"[P^-1 q, q] vanished at iteration {it}")
        with np.errstate(over="ignore", invalid="ignore"):
            alpha = rho / mu
        if not np.isfinite(alpha):
            return done(Status.NUMERICAL_FAILURE, f"step length overflowed at iteration {it}")
        x += alpha * p
        # out of place: r~ may alias r if the preconditioner returns its argument
        r = r - alpha * q
        rn = float(np.linalg.norm(r))
        hist.append(rn)
        if not np.isfinite(rn):
            return done(Status.NUMERICAL_FAILURE, f"non-finite residual at iteration {it}")
        if rn <= tol * bnorm:
            return done(Status.CONVERGED)
        best.offer(x, rn)
        rt = rt - alpha * qt
        t = A(rt)
        nmv += 1
        beta = rho
        rho = _bil(rt, t)
        if abs(rho) <= breakdown_tol * np.linalg.norm(rt) * np.linalg.norm(t):
            return done(Status.BREAKDOWN, f"rho = [r~, A r~] vanished at iteration {it}")
        beta = rho / beta
        p = rt + beta * p
        q = t + beta * q
    return done(Status.NOT_CONVERGED, f"no convergence in {maxit} iterations")


class _BestIterate:
    """Copy of the iterate with the smallest recorded residual norm."""

    def __init__(self, x, rnorm):
        self.x = x.copy()
        self.rnorm = rnorm

    def offer(self, x, rnorm):
        if rnorm < self.rnorm:
            self.x[:] = x
            self.rnorm = rnorm

    def pick(self, x, rnorm):
        if np.isfinite(rnorm) and rnorm <= self.rnorm:
            return x
        return self.x


def _check_args(tol, maxit):
    if not tol > 0:
        raise ValueError("tol must be positive")
    if maxit < 1:
        raise ValueError("maxit must be >= 1")


# -- real SPD machinery -----------------------------------------------------


def pcg_real(M, rhs, precond: Optional[Callable] = None, tol: float = 1e-10,
             maxit: int = 1000, x0=None) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradients for a real SPD matrix.

    ``M`` is a :class:`SparseSymMatrix`, a dense array or a callable.
    """
    _check_args(tol, maxit)
    if isinstance(M, SparseSymMatrix):
        mv = M.matvec
    elif callable(M):
        mv = M
    else:
        A = M
        mv = lambda v: A @ v  # noqa: E731
    P = precond or _identity
    b = np.asarray(rhs, dtype=np.float64)
    t0 = time.perf_counter()
    nmv = npc = 0
    bnorm = float(np.linalg.norm(b))
    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = np.array(x0, dtype=np.float64)
        r = b - mv(x)
        nmv += 1
    hist = [float(np.linalg.norm(r))]

    best = _BestIterate(x, hist[0])

    def done(status, msg=""):
        xr = x if status is Status.CONVERGED else best.pick(x, hist[-1])
        return xr, SolveReport(status, hist, bnorm, time.perf_counter() - t0, nmv, npc, msg)

    if hist[0] <= tol * bnorm:
        return done(Status.CONVERGED)
    z = P(r)
    npc += 1
    p = z.copy()
    rz = float(r @ z)
    for it in range(1, maxit + 1):
        q = mv(p)
        nmv += 1
        pq = float(p @ q)
        if pq <= 0:
            return done(Status.BREAKDOWN, f"p^T M p = {pq} at iteration {it}; M not SPD?")
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        rn = float(np.linalg.norm(r))
        hist.append(rn)
        if not np.isfinite(rn):
            return done(Status.NUMERICAL_FAILURE, f"non-finite residual at iteration {it}")
        if rn <= tol * bnorm:
            return done(Status.CONVERGED)
        best.offer(x, rn)
        z = P(r)
        npc += 1
        rz_new = float(r @ z)
        if rz_new == 0:
            return done(Status.BREAKDOWN, f"r^T z vanished at iteration {it}")
        p = z + (rz_new / rz) * p
        rz = rz_new
    return done(Status.NOT_CONVERGED, f"no convergence in {maxit} iterations")


def _ic0_lower(L: sp.csr_matrix, pivot_ok) -> sp.csr_matrix:
    """Zero-fill IC in place on a sorted lower-triangular CSR ``L`` (diagonal last in each row)."""
    n = L.shape[0]
    indptr, indices, data = L.indptr, L.indices, L.data
    pos = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        lo, hi = indptr[i], indptr[i + 1]
        if hi == lo or indices[hi - 1] != i:
            raise PivotBreakdown(i, 0.0)
        cols = indices[lo:hi]
        pos[cols] = np.arange(lo, hi)
        for t in range(lo, hi - 1):
            k = indices[t]
            klo, khi = indptr[k], indptr[k + 1] - 1  # row k without its diagonal
            kc = indices[klo:khi]
            idx = pos[kc]
            hit = idx >= 0
            if hit.any():
                s = np.dot(data[idx[hit]], data[klo:khi][hit])
                data[t] = (data[t] - s) / data[khi]
            else:
                data[t] = data[t] / data[khi]
        off = data[lo:hi - 1]
        d = data[hi - 1] - np.dot(off, off)
        if not pivot_ok(d):
            pos[cols] = -1
            raise PivotBreakdown(i, d)
        data[hi - 1] = np.sqrt(d)
        pos[cols] = -1
    return L


def _lower_with_diagonal(A: sp.spmatrix, dtype) -> sp.csr_matrix:
    A = sp.csr_matrix(A, dtype=dtype)
    L = sp.tril(A, format="csr")
    n = A.shape[0]
    # keep explicit diagonal slots so every row has a pivot position
    L = (L + sp.diags(np.zeros(n, dtype=dtype), format="csr")).tocsr()
    L = sp.csr_matrix((L.data.astype(dtype), L.indices, L.indptr), shape=L.shape)
    L.sort_indices()
    return L


def ic0_factorize(M, shift: float = 0.0) -> sp.csr_matrix:
    """Zero-fill incomplete Cholesky ``L L^T ~ M`` on the lower pattern of ``M``.

    ``shift`` factors ``M + shift * diag(M)`` instead.

    Raises
    ------
    PivotBreakdown
        If a computed pivot is not positive.
    """
    A = M.to_scipy() if isinstance(M, SparseSymMatrix) else sp.csr_matrix(M)
    if shift:
        A = A + shift * sp.diags(A.diagonal())
    L = _lower_with_diagonal(A, np.float64)
    return _ic0_lower(L, lambda d: np.isfinite(d) and d > 0)


def complex_ic0(B, C, shift: float = 0.0, pivot_tol: float = 1e-14) -> sp.csr_matrix:
    """Zero-fill incomplete ``L L^T ~ B + iC`` (plain transpose) on the union pattern.

    Square roots take the principal branch.  A pivot whose magnitude falls
    below ``pivot_tol`` times the largest diagonal magnitude raises
    :class:`PivotBreakdown`.
    """
    Bs = B.to_scipy() if isinstance(B, SparseSymMatrix) else sp.csr_matrix(B)
    Cs = C.to_scipy() if isinstance(C, SparseSymMatrix) else sp.csr_matrix(C)
    A = (Bs.astype(np.complex128) + 1j * Cs).tocsr()
    if shift:
        A = A + shift * sp.diags(A.diagonal())
    dmax = float(np.max(np.abs(A.diagonal()), initial=0.0))
    floor = pivot_tol * (dmax if dmax > 0 else 1.0)
    L = _lower_with_diagonal(A, np.complex128)
    return _ic0_lower(L, lambda d: np.isfinite(d) and abs(d) > floor)


def ic0_with_shift(factorize: Callable, shifts=(0.0, 1e-3, 1e-2, 1e-1)):
    """Try ``factorize(shift=s)`` over increasing diagonal shifts.

    Returns ``(L, shift_used)``; re-raises the last breakdown if all fail.
    """
    last = None
    for s in shifts:
        try:
            return factorize(shift=s), s
        except PivotBreakdown as exc:
            last = exc
    raise last
