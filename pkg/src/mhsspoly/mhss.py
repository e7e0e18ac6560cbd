"""
The one-step MHSS splitting ``A = P - Q`` with ``P = (1+i)(B+C)`` and
``Q = C + iB``, the fixed-point solver built on it, and closed-form
diagnostics for the splitting.
"""

from __future__ import annotations

import math
import time
import warnings

import numpy as np
import scipy.linalg as sla

from .core import ComplexSymSystem, DimensionError
from .innersolve import InnerSolveFailure, SpdSolver
from .krylov import SolveReport, Status

__all__ = [
    "mhss_apply_exact",
    "mhss_solve",
    "upper_bound_U",
    "kappa_bound",
    "cost_model_C",
    "spectral_radius_PQ",
    "SQRT2_OVER_2",
]

SQRT2_OVER_2 = math.sqrt(2.0) / 2.0
_HALF_ONE_MINUS_I = (1.0 - 1.0j) / 2.0


def _solver_fn(solveM):
    return solveM.solve if isinstance(solveM, SpdSolver) else solveM


def mhss_apply_exact(solveM, r) -> np.ndarray:
    """Return ``P^{-1} r`` using two real solves with ``M = B + C``.

    ``solveM`` is an :class:`~mhsspoly.innersolve.SpdSolver` or any callable
    ``v -> M^{-1} v`` on real vectors.
    """
    solve = _solver_fn(solveM)
    w = _HALF_ONE_MINUS_I * np.asarray(r, dtype=np.complex128)
    try:
        re = solve(np.ascontiguousarray(w.real))
        im = solve(np.ascontiguousarray(w.imag))
    except (ArithmeticError, np.linalg.LinAlgError, InnerSolveFailure) as exc:
        raise InnerSolveFailure(f"inner SPD solve failed while applying the MHSS step: {exc}") from exc
    return re + 1j * im


def mhss_solve(system: ComplexSymSystem, solveM, tol: float = 1e-8,
               maxit: int = 5000) -> tuple[np.ndarray, SolveReport]:
    """Stationary iteration ``x <- x + P^{-1}(b - A x)`` from ``x = 0``.

    The residual is recomputed from the original right-hand side each step.
    On non-convergence the iterate with the smallest residual is returned.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if maxit < 1:
        raise ValueError("maxit must be >= 1")
    t0 = time.perf_counter()
    b = system.rhs
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(system.n, dtype=np.complex128)
    r = b.copy()
    hist = [bnorm]
    best_x, best_r = x.copy(), bnorm
    nmv = npc = 0
    status, msg = Status.NOT_CONVERGED, f"no convergence in {maxit} iterations"
    if bnorm == 0:
        status, msg = Status.CONVERGED, ""
    else:
        for it in range(1, maxit + 1):
            x += mhss_apply_exact(solveM, r)
            npc += 1
            r = b - system.matvec(x)
            nmv += 1
            rn = float(np.linalg.norm(r))
            hist.append(rn)
            if not np.isfinite(rn):
                status, msg = Status.NUMERICAL_FAILURE, f"non-finite residual at iteration {it}"
                break
            if rn < best_r:
                best_x[:], best_r = x, rn
            if rn <= tol * bnorm:
                status, msg = Status.CONVERGED, ""
                break
    if status is not Status.CONVERGED:
        x = best_x
    return x, SolveReport(status, hist, bnorm, time.perf_counter() - t0, nmv, npc, msg)


def upper_bound_U(alpha: float, beta: float) -> float:
    """Bound on the contraction factor of the two-parameter splitting.

    ``U(alpha, beta) = sqrt(1 + beta^2) / (1 + alpha) * max(1, alpha / beta)``,
    minimised at ``alpha = beta = 1`` where it equals ``sqrt(2)/2``.
    """
    if not alpha >= 0:
        raise ValueError("alpha must be >= 0")
    if not beta > 0:
        raise ValueError("beta must be > 0")
    return math.sqrt(1.0 + beta * beta) / (1.0 + alpha) * max(1.0, alpha / beta)


def kappa_bound(n: int) -> float:
    """Condition estimate ``(1 + 0.8^n) / (1 - 0.8^n)`` after ``n`` MHSS steps."""
    n = _positive_int(n)
    # 0.8^n = 4^n / 5^n; integer arithmetic keeps kappa_bound(1) == 9 exactly
    return (5**n + 4**n) / (5**n - 4**n)


def cost_model_C(n: int) -> float:
    """Relative preconditioner cost below which ``n`` steps beat ``n - 1``.

    Stationary point in ``n`` of ``sqrt((1 + a^n) / (1 - a^n)) * (1 + C n)``
    with ``a = 0.8``, solved for ``C``.
    """
    n = _positive_int(n)
    a = 0.8
    an = a**n
    la = math.log(a)
    return -an * la / (n * an * la - an * an + 1.0)


def _positive_int(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def spectral_radius_PQ(B, C, restarts: int = 20, steps: int = 500, tol: float = 1e-10,
                       seed: int = 0) -> float:
    """Spectral radius of ``P^{-1} Q`` by power iteration on small dense pairs.

    Each restart is one column of a block started from random complex
    vectors; columns are normalised independently (no deflation).  Growth is
    measured in the norm ``sqrt(x^H M x)``, in which the iteration operator is
    normal, so every column's growth ratio converges to its dominant modulus
    from below.  Returns the largest ratio over restarts.
    """
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if B.shape != C.shape or B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise DimensionError(f"B and C must be square of equal size, got {B.shape} and {C.shape}")
    n = B.shape[0]
    M = B + C
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(M, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise np.linalg.LinAlgError(f"B + C is singular: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0) or np.linalg.cond(M) > 1e15:
        raise np.linalg.LinAlgError("B + C is singular")
    T = sla.lu_solve(lu, C + 1j * B) / (1.0 + 1.0j)

    def mnorm(X):
        return np.sqrt(np.maximum(np.real(np.einsum("ij,ij->j", X.conj(), M @ X)), 0.0))

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, restarts)) + 1j * rng.standard_normal((n, restarts))
    X /= mnorm(X)
    ratio = np.zeros(restarts)
    for _ in range(steps):
        Y = T @ X
        nrm = mnorm(Y)
        new = nrm.copy()
        if np.all(nrm == 0):
            return 0.0
        nrm[nrm == 0] = 1.0
        X = Y / nrm
        done = np.max(np.abs(new - ratio)) <= tol * max(1.0, np.max(new))
        ratio = new
        if done:
            break
    return float(np.max(ratio))
