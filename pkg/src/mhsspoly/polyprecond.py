"""Applying ``s_m(M)`` to vectors, and the polynomial MHSS step built on it."""

from __future__ import annotations

import numpy as np

from .core import DimensionError, SparseSymMatrix
from .orthopoly import RecurrenceCoeffs

__all__ = ["apply_sm", "apply_polynomial_P_inverse", "error_growth_probe"]

HALF_ONE_MINUS_I = (1.0 - 1.0j) / 2.0


def _matvec_fn(M):
    if isinstance(M, SparseSymMatrix):
        return M.n, M.matvec
    A = np.asarray(M) if not hasattr(M, "shape") else M
    return A.shape[0], (lambda x: A @ x)


def apply_sm(M, coeffs: RecurrenceCoeffs, v) -> np.ndarray:
    """Return ``s_m(M) v`` using the three-term recurrence.

    Parameters
    ----------
    M : SparseSymMatrix or array_like
        Symmetric matrix with spectrum in (0, 1].  Dense arrays are accepted
        for small test problems.
    coeffs : RecurrenceCoeffs
        Primed coefficients of degree ``m``.
    v : array_like
        Real or complex vector (complex input runs as a two-column real block).

    Notes
    -----
    Uses ``m`` products with ``M`` and three work vectors regardless of ``m``.
    """
    n, mv = _matvec_fn(M)
    v = np.asarray(v)
    if v.shape[0] != n:
        raise DimensionError(f"matrix has size {n}, vector has length {v.shape[0]}")
    ap, bp, cp = coeffs.a_prime, coeffs.b_prime, coeffs.c_prime
    m = coeffs.degree
    if m == 0:
        return ap[0] * v
    t1 = ap[0] * v
    y = ap[1] * mv(v) + bp[1] * v
    for k in range(2, m + 1):
        t0, t1 = t1, y
        y = mv(t1)
        y -= v
        y *= ap[k]
        y += bp[k] * t1
        y += cp[k] * t0
    return y


def apply_polynomial_P_inverse(M, coeffs: RecurrenceCoeffs, r) -> np.ndarray:
    """Approximate ``P^{-1} r`` for ``P = (1+i) M`` as ``(1-i)/2 * s_m(M) r``.

    ``M`` must already be equilibrated so its spectrum lies in (0, 1].
    """
    r = np.asarray(r, dtype=np.complex128)
    return HALF_ONE_MINUS_I * apply_sm(M, coeffs, r)


def _as_diagonal(M):
    """Split ``M`` into (diagonal vector, None) or (None, dense array)."""
    if isinstance(M, SparseSymMatrix):
        rows = np.repeat(np.arange(M.n), np.diff(M.row_offsets))
        if np.array_equal(rows, M.col_indices) and M.nnz == M.n:
            return M.values.copy(), None
        return None, M.toarray()
    A = np.asarray(M, dtype=np.float64)
    if A.ndim == 1:
        return A, None
    if np.count_nonzero(A - np.diag(np.diag(A))) == 0:
        return np.diag(A).copy(), None
    return None, A


def _reference_mpmath(lam, coeffs, v, dps):
    import mpmath

    ap = coeffs.a_prime.tolist()
    bp = coeffs.b_prime.tolist()
    cp = coeffs.c_prime.tolist()
    m = coeffs.degree
    out = np.empty(len(lam))
    peak = 0.0
    with mpmath.workdps(dps):
        for i, (li, vi) in enumerate(zip(lam.tolist(), v.tolist())):
            x = mpmath.mpf(li)
            vv = mpmath.mpf(vi)
            y = mpmath.mpf(ap[0]) * vv
            top = abs(y)
            if m >= 1:
                t1 = y
                y = mpmath.mpf(ap[1]) * x * vv + mpmath.mpf(bp[1]) * vv
                top = max(top, abs(y))
                for k in range(2, m + 1):
                    t0, t1 = t1, y
                    y = (mpmath.mpf(ap[k]) * (x * t1 - vv) + mpmath.mpf(bp[k]) * t1
                         + mpmath.mpf(cp[k]) * t0)
                    top = max(top, abs(y))
            out[i] = float(y)
            peak = max(peak, float(top))
    return out, peak


def _reference_longdouble(A, coeffs, v):
    A = np.asarray(A, dtype=np.longdouble)
    v = np.asarray(v, dtype=np.longdouble)
    ap, bp, cp = (np.asarray(c, dtype=np.longdouble) for c in
                  (coeffs.a_prime, coeffs.b_prime, coeffs.c_prime))
    mv = (lambda x: A * x) if A.ndim == 1 else (lambda x: A @ x)
    y = ap[0] * v
    peak = np.max(np.abs(y), initial=0.0)
    if coeffs.degree >= 1:
        t1 = y
        y = ap[1] * mv(v) + bp[1] * v
        peak = max(peak, np.max(np.abs(y), initial=0.0))
        for k in range(2, coeffs.degree + 1):
            t0, t1 = t1, y
            y = ap[k] * (mv(t1) - v) + bp[k] * t1 + cp[k] * t0
            peak = max(peak, np.max(np.abs(y), initial=0.0))
    return y.astype(np.float64), float(peak)


def error_growth_probe(M, coeffs: RecurrenceCoeffs, v, reference_precision: str = "mpmath",
                       dps: int = 40, normalize: bool = False) -> float:
    """Max-norm gap between double-precision ``apply_sm`` and a high-precision run.

    Both runs use the same (double) coefficients, so the gap is the rounding
    error accumulated by the recurrence itself.

    Parameters
    ----------
    M : SparseSymMatrix or array_like
        Diagonal (vector or matrix) or small dense symmetric matrix.
    coeffs : RecurrenceCoeffs
    v : array_like
        Real vector.
    reference_precision : {"mpmath", "longdouble"}
        ``"mpmath"`` works on diagonal ``M`` only, with ``dps`` digits.
    normalize : bool
        Divide by ``u * max_k ||s_k(M) v||_inf`` (``u`` the unit roundoff),
        i.e. report the error in units of the rounding committed in one step.
        A linearly growing error then stays below ``K * m`` for a small ``K``.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return 0.0
    d, dense = _as_diagonal(M)
    got = apply_sm(_DiagOp(d) if d is not None else dense, coeffs, v)
    if reference_precision == "mpmath":
        if d is None:
            raise ValueError("mpmath reference needs a diagonal matrix; use 'longdouble'")
        ref, peak = _reference_mpmath(d, coeffs, v, dps)
    elif reference_precision == "longdouble":
        ref, peak = _reference_longdouble(d if d is not None else dense, coeffs, v)
    else:
        raise ValueError(f"unknown reference precision {reference_precision!r}")
    err = float(np.max(np.abs(got - ref)))
    if normalize:
        unit = np.finfo(np.float64).eps / 2
        return err / (unit * peak) if peak > 0 else 0.0
    return err


class _DiagOp:
    """Diagonal matrix acting by elementwise product (same rounding as a CSR diagonal)."""

    def __init__(self, d):
        self.d = np.asarray(d, dtype=np.float64)
        self.shape = (self.d.size, self.d.size)

    def __matmul__(self, x):
        return self.d * x
