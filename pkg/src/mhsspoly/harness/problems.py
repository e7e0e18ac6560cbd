"""Test problems: paired file matrices and synthetic stand-ins."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..core import ComplexSymSystem, SparseSymMatrix

__all__ = ["ones_complex", "pair_and_pad", "laplacian2d", "synthetic_problem", "SYNTHETIC_KINDS"]

SYNTHETIC_KINDS = ("laplacian2d", "diag_spectrum")


def ones_complex(n: int) -> np.ndarray:
    """The right-hand side ``(1+i) * ones(n)``."""
    return np.full(n, 1.0 + 1.0j)


def pair_and_pad(B: SparseSymMatrix, C: SparseSymMatrix, rhs=None) -> ComplexSymSystem:
    """Build ``(B + iC) x = rhs``, zero-padding the smaller matrix to the larger size."""
    n = max(B.n, C.n)
    if B.n < n:
        B = B.padded(n)
    if C.n < n:
        C = C.padded(n)
    return ComplexSymSystem(B, C, ones_complex(n) if rhs is None else rhs)


def laplacian2d(k: int) -> SparseSymMatrix:
    """Five-point Dirichlet Laplacian on a ``k x k`` grid (stencil 4, -1)."""
    T = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(k, k))
    I = sp.identity(k)
    return SparseSymMatrix.from_scipy((sp.kron(I, T) + sp.kron(T, I)).tocsr())


def synthetic_problem(kind: str, n: int, seed: int = 0, epsilon: float = 0.01) -> ComplexSymSystem:
    """Desk-scale problems with ``B``, ``C`` semi-SPD and ``B + C`` SPD.

    ``laplacian2d``
        ``n`` must be a perfect square ``k^2``.  ``B`` is the 5-point
        Laplacian, ``C`` a positive diagonal ``10 h^2 (0.5 + u_i)`` with
        ``h = 1/(k+1)`` and ``u_i`` uniform on [0, 1).
    ``diag_spectrum``
        Diagonal ``B`` and ``C`` whose sum is the uniform grid of ``n``
        points on ``[epsilon, 1]``, split at random fractions.  Equilibration
        would map this ``B + C`` to the identity, so solve it unscaled.

    The right-hand side is ``(1+i) * ones(n)``.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    if kind == "laplacian2d":
        k = int(round(np.sqrt(n)))
        if k * k != n:
            raise ValueError(f"laplacian2d needs a square size, got n = {n}")
        h = 1.0 / (k + 1)
        B = laplacian2d(k)
        C = SparseSymMatrix.diag(10.0 * h * h * (0.5 + rng.random(n)))
    elif kind == "diag_spectrum":
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        lam = np.linspace(epsilon, 1.0, n)
        frac = rng.random(n)
        B = SparseSymMatrix.diag(frac * lam)
        C = SparseSymMatrix.diag(lam - frac * lam)
    else:
        raise ValueError(f"unknown synthetic problem {kind!r}; choose from {SYNTHETIC_KINDS}")
    return ComplexSymSystem(B, C, ones_complex(n))
