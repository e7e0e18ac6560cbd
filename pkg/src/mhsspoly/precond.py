"""Preconditioner handles for the complex Krylov solvers."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla

from .core import ComplexSymSystem
from .innersolve import DENSE_LIMIT, SpdSolver, make_spd_solver
from .krylov import complex_ic0, ic0_with_shift
from .mhss import mhss_apply_exact
from .orthopoly import DEFAULT_DELTA, RecurrenceCoeffs, make_coeffs
from .polyprecond import apply_polynomial_P_inverse

__all__ = ["PRECONDITIONERS", "Preconditioner", "build_preconditioner"]

PRECONDITIONERS = (
    "none",
    "ilu0",
    "mhss-exact",
    "mhss-ilu0",
    "mhss-ilu0-pcg",
    "mhss-cheb",
    "mhss-jacobi",
)


@dataclass
class Preconditioner:
    """A linear map ``r -> P^{-1} r`` plus what was needed to build it.

    Calling the handle applies it and bumps :attr:`applications`.
    """

    kind: str
    apply: Callable[[np.ndarray], np.ndarray]
    info: dict = field(default_factory=dict)
    coeffs: Optional[RecurrenceCoeffs] = None
    inner: Optional[SpdSolver] = None
    applications: int = 0
    setup_time: float = 0.0

    def __call__(self, r):
        self.applications += 1
        return self.apply(r)

    def describe(self) -> dict:
        out = {"kind": self.kind, **self.info}
        if self.coeffs is not None:
            out["coefficients"] = self.coeffs.describe()
        if self.inner is not None:
            out["inner"] = self.inner.describe()
        return out


def build_preconditioner(system: ComplexSymSystem, kind: str = "mhss-jacobi",
                         degree: int = 50, delta: float = DEFAULT_DELTA, *,
                         inner_tol: float = 1e-2, inner_maxit: int = 500,
                         dense_limit: int = DENSE_LIMIT) -> Preconditioner:
    """Construct a preconditioner for ``system`` by name.

    ``kind`` is one of :data:`PRECONDITIONERS`.  The polynomial kinds
    (``mhss-cheb``, ``mhss-jacobi``) assume the system is already
    equilibrated, i.e. the spectrum of ``B + C`` lies in (0, 1].
    """
    t0 = time.perf_counter()
    if kind == "none":
        pre = Preconditioner(kind, lambda r: np.array(r, dtype=np.complex128))
    elif kind == "ilu0":
        L, shift = ic0_with_shift(lambda shift: complex_ic0(system.B, system.C, shift))
        Lt = L.T.tocsr()

        def apply(r):
            y = spla.spsolve_triangular(L, np.asarray(r, dtype=np.complex128), lower=True)
            return spla.spsolve_triangular(Lt, y, lower=False)

        pre = Preconditioner(kind, apply, {"shift": shift, "factor_nnz": int(L.nnz)})
    elif kind in ("mhss-exact", "mhss-ilu0", "mhss-ilu0-pcg"):
        M = system.M
        if kind == "mhss-exact":
            inner = make_spd_solver(M, "auto", dense_limit=dense_limit)
        elif kind == "mhss-ilu0":
            inner = make_spd_solver(M, "ic0-direct")
        else:
            inner = make_spd_solver(M, "ic0-pcg", tol=inner_tol, maxit=inner_maxit)
        pre = Preconditioner(kind, lambda r: mhss_apply_exact(inner, r), inner=inner)
    elif kind in ("mhss-cheb", "mhss-jacobi"):
        coeffs = make_coeffs(kind, degree, delta)
        M = system.M
        pre = Preconditioner(kind, lambda r: apply_polynomial_P_inverse(M, coeffs, r),
                             coeffs=coeffs)
    else:
        raise ValueError(f"unknown preconditioner {kind!r}; choose from {', '.join(PRECONDITIONERS)}")
    pre.setup_time = time.perf_counter() - t0
    return pre
