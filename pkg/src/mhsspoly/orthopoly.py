"""
Recurrence coefficients for polynomial approximations of ``M^{-1}``.

A degree-``m`` preconditioner polynomial ``s_m`` is tied to a residual
polynomial ``r_{m+1}(x) = 1 - x s_m(x)`` with ``r_{m+1}(0) = 1``.  Given any
family of orthogonal polynomials ``q_n`` with three-term recurrence

    q_0 = 1,  q_1 = a_0 x + b_0,  q_{n+1} = (a_n x + b_n) q_n + c_n q_{n-1},

the normalised ratios ``r_n = q_n / q_n(0)`` and the matching ``s_n`` obey
three-term recurrences of their own with *primed* coefficients

    s_0 = a'_0,  s_1 = a'_1 x + b'_1,
    s_n = (a'_n x + b'_n) s_{n-1} + c'_n s_{n-2} - a'_n,        n >= 2,

which is what :mod:`mhsspoly.polyprecond` runs on matrices.  Two families are
provided:

* ``chebyshev``: minimax residual on ``[eps, 1]``, with ``eps`` chosen from
  the degree and a target band half-width ``delta``;
* ``jacobi``: least-squares residual on ``[0, 1]`` (kernel polynomials of the
  Legendre family, i.e. Jacobi weight ``(1-x)^0 x^1``); needs no spectral
  information at all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "DegenerateRecurrence",
    "BaseRecurrence",
    "RecurrenceCoeffs",
    "lemma_transform",
    "closed_jacobi_coeffs",
    "closed_cheb_coeffs",
    "cheb_epsilon_from_delta",
    "chebyshev_coeffs",
    "jacobi_coeffs",
    "make_coeffs",
    "eval_residual_poly",
    "eval_sm",
    "stability_roots",
    "DEFAULT_DELTA",
]

DEFAULT_DELTA = 0.2


class DegenerateRecurrence(ZeroDivisionError):
    """A denominator of the primed-coefficient transform vanished."""

    def __init__(self, n: int, what: str = "denominator"):
        super().__init__(f"{what} is zero at n={n}")
        self.n = n


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BaseRecurrence:
    """Coefficients ``a_n, b_n, c_n`` (n = 0..len-1) of ``q_{n+1} = (a_n x + b_n) q_n + c_n q_{n-1}``.

    ``c[0]`` is never used.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        a, b, c = (_frozen(v) for v in (self.a, self.b, self.c))
        if not (a.shape == b.shape == c.shape) or a.ndim != 1:
            raise ValueError("a, b, c must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
            raise ValueError("recurrence coefficients must be finite")
        if np.any(c[1:] == 0):
            raise ValueError("c_n must be nonzero for n >= 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    def __len__(self):
        return self.a.size

    @classmethod
    def jacobi(cls, m: int, alpha: float = 0.0, beta: float = 1.0) -> "BaseRecurrence":
        """Monic Jacobi polynomials for the weight ``(1-x)^alpha x^beta`` on [0, 1].

        Returns coefficients for ``n = 0..m`` (enough for ``q_{m+1}``).
        """
        if alpha <= -1 or beta <= -1:
            raise ValueError("Jacobi parameters must exceed -1")
        n = np.arange(m + 1, dtype=np.float64)
        ab = alpha + beta
        a = np.ones(m + 1)
        if beta * beta == alpha * alpha:
            shift = np.zeros(m + 1)
        else:
            shift = (beta**2 - alpha**2) / ((2 * n + ab) * (2 * n + 2 + ab))
        b = -0.5 * (1.0 + shift)
        c = np.zeros(m + 1)
        k = n[1:]
        c[1:] = -(k * (k + alpha) * (k + beta) * (k + ab)) / (
            (2 * k - 1 + ab) * (2 * k + 1 + ab) * (2 * k + ab) ** 2)
        return cls(a, b, c, name=f"jacobi({alpha:g},{beta:g})")

    @classmethod
    def chebyshev(cls, epsilon: float, m: int) -> "BaseRecurrence":
        """Chebyshev polynomials of the first kind mapped to ``[epsilon, 1]``."""
        _check_epsilon(epsilon)
        a1 = 2.0 / (1.0 - epsilon)
        b1 = -(1.0 + epsilon) / (1.0 - epsilon)
        a = np.full(m + 1, 2.0 * a1)
        b = np.full(m + 1, 2.0 * b1)
        c = np.full(m + 1, -1.0)
        a[0], b[0], c[0] = a1, b1, 0.0
        return cls(a, b, c, name=f"chebyshev(eps={epsilon:g})")

    def evaluate(self, n: int, x) -> np.ndarray:
        """``q_n(x)`` by the plain recurrence (unnormalised; test oracle)."""
        x = np.asarray(x, dtype=np.float64)
        q0 = np.ones_like(x)
        if n == 0:
            return q0
        q1 = self.a[0] * x + self.b[0]
        for k in range(1, n):
            q0, q1 = q1, (self.a[k] * x + self.b[k]) * q1 + self.c[k] * q0
        return q1


@dataclass(frozen=True)
class RecurrenceCoeffs:
    """Primed coefficients driving ``s_m`` and ``r_{m+1}``.

    Arrays are indexed by ``n = 0..degree``.  Only ``a_prime[0]``,
    ``a_prime[1]``, ``b_prime[1]`` are meaningful for ``n < 2``; the unused
    slots ``b_prime[0]``, ``c_prime[0]``, ``c_prime[1]`` hold 0.
    ``gamma[n] = q_n(0) / q_{n+1}(0)``.
    """

    family: str
    degree: int
    a_prime: np.ndarray
    b_prime: np.ndarray
    c_prime: np.ndarray
    gamma: np.ndarray
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        m = self.degree
        if m < 0:
            raise ValueError("degree must be >= 0")
        for name in ("a_prime", "b_prime", "c_prime", "gamma"):
            arr = _frozen(getattr(self, name))
            if arr.shape != (m + 1,):
                raise ValueError(f"{name} must have length degree+1={m + 1}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)

    @property
    def a0_prime(self) -> float:
        return float(self.a_prime[0])

    @property
    def a1_prime(self) -> float:
        return float(self.a_prime[1]) if self.degree >= 1 else math.nan

    @property
    def b1_prime(self) -> float:
        return float(self.b_prime[1]) if self.degree >= 1 else math.nan

    def describe(self) -> dict:
        return {"family": self.family, "degree": self.degree,
                "epsilon": self.epsilon, "delta": self.delta}

    def table(self):
        """Rows ``(n, a'_n, b'_n, c'_n)``."""
        return [(n, float(self.a_prime[n]), float(self.b_prime[n]), float(self.c_prime[n]))
                for n in range(self.degree + 1)]


def lemma_transform(base: BaseRecurrence, m: int, *, family: str | None = None,
                    epsilon: float | None = None, delta: float | None = None) -> RecurrenceCoeffs:
    """Primed coefficients of ``s_0..s_m`` from a base recurrence.

    Needs ``base`` coefficients for ``n = 0..m``.

    Raises
    ------
    DegenerateRecurrence
        If ``b_0``, ``b_0 b_1 + c_1`` or some ``b_n + c_n gamma_{n-1}`` is zero.
    """
    if m < 0:
        raise ValueError("degree must be >= 0")
    if len(base) < max(m + 1, 1):
        raise ValueError(f"base recurrence has {len(base)} terms, need {m + 1}")
    a, b, c = base.a, base.b, base.c
    ap = np.zeros(m + 1)
    bp = np.zeros(m + 1)
    cp = np.zeros(m + 1)
    g = np.zeros(m + 1)

    if b[0] == 0:
        raise DegenerateRecurrence(0, "b_0")
    ap[0] = -a[0] / b[0]
    g[0] = 1.0 / b[0]
    if m >= 1:
        den = b[0] * b[1] + c[1]
        if den == 0:
            raise DegenerateRecurrence(1, "b_0 b_1 + c_1")
        ap[1] = -a[0] * a[1] / den
        bp[1] = -(a[0] * b[1] + a[1] * b[0]) / den
        g[1] = b[0] / den
    for n in range(2, m + 1):
        d = b[n] + c[n] * g[n - 1]
        if d == 0:
            raise DegenerateRecurrence(n, "b_n + c_n gamma_{n-1}")
        g[n] = 1.0 / d
        ap[n] = a[n] * g[n]
        bp[n] = b[n] * g[n]
        cp[n] = c[n] * g[n - 1] * g[n]
    return RecurrenceCoeffs(family or base.name, m, ap, bp, cp, g, epsilon=epsilon, delta=delta)


def closed_jacobi_coeffs(m: int) -> RecurrenceCoeffs:
    """Closed-form primed coefficients for the least-squares (Jacobi) family."""
    if m < 0:
        raise ValueError("degree must be >= 0")
    n = np.arange(m + 1, dtype=np.float64)
    gamma = -4.0 + 2.0 * (3 * n + 5) / (n + 2) ** 2
    dlt = 2.0 * (3 * n**2 + 6 * n + 2) / ((2 * n + 1) * (n + 2) ** 2)
    ap = gamma.copy()
    bp = 2.0 - dlt
    cp = -1.0 + dlt
    # gamma_0 = 1/b_0 with b_0 = -2/3
    g = gamma.copy()
    g[0] = -1.5
    ap[0] = 1.5
    bp[0] = cp[0] = 0.0
    if m >= 1:
        ap[1], bp[1], cp[1] = -10.0 / 3.0, 4.0, 0.0
    return RecurrenceCoeffs("jacobi", m, ap, bp, cp, g)


def _check_epsilon(epsilon):
    if not (0.0 < epsilon < 1.0):
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")


def _cheb_gamma(c: float, n: np.ndarray) -> np.ndarray:
    # (c^n + c^-n) / (c^(n+1) + c^-(n+1)) multiplied through by c^(n+1); |c| < 1
    c2n = c ** (2 * n)
    return (c2n * c + c) / (c2n * c * c + 1.0)


def closed_cheb_coeffs(epsilon: float, m: int, *, delta: float | None = None) -> RecurrenceCoeffs:
    """Closed-form primed coefficients for the Chebyshev family on ``[epsilon, 1]``."""
    _check_epsilon(epsilon)
    if m < 0:
        raise ValueError("degree must be >= 0")
    e = float(epsilon)
    c = (math.sqrt(e) - 1.0) / (math.sqrt(e) + 1.0)
    n = np.arange(m + 1, dtype=np.float64)
    g = _cheb_gamma(c, n)
    ap = 4.0 * g / (1.0 - e)
    bp = -2.0 * g * (1.0 + e) / (1.0 - e)
    cp = np.zeros(m + 1)
    cp[2:] = -g[2:] * g[1:-1]
    q = e * e + 6.0 * e + 1.0
    ap[0] = 2.0 / (1.0 + e)
    bp[0] = 0.0
    if m >= 1:
        ap[1] = -8.0 / q
        bp[1] = 8.0 * (1.0 + e) / q
    if delta is None:
        # 1 / |T_{m+1}(0)| on [eps, 1]
        ac = abs(c) ** (m + 1)
        delta = 2.0 * ac / (1.0 + ac * ac)
    return RecurrenceCoeffs("chebyshev", m, ap, bp, cp, g, epsilon=e, delta=float(delta))


def cheb_epsilon_from_delta(delta: float, m: int) -> float:
    """Left end ``eps`` of the interval on which ``|r_{m+1}| <= delta``.

    The residual polynomial has degree ``m + 1``; its Chebyshev design makes
    ``max_{[eps,1]} |r_{m+1}| = delta`` exactly.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if m < 0:
        raise ValueError("degree must be >= 0")
    x = (1.0 + math.sqrt(1.0 - delta * delta)) / delta
    t = math.expm1(math.log(x) / (m + 1))  # |c| - 1
    return (t / (t + 2.0)) ** 2


def chebyshev_coeffs(m: int, delta: float = DEFAULT_DELTA) -> RecurrenceCoeffs:
    eps = cheb_epsilon_from_delta(delta, m)
    return closed_cheb_coeffs(eps, m, delta=delta)


def jacobi_coeffs(m: int) -> RecurrenceCoeffs:
    return closed_jacobi_coeffs(m)


def make_coeffs(family: str, m: int, delta: float = DEFAULT_DELTA) -> RecurrenceCoeffs:
    family = family.lower()
    if family in ("jacobi", "mhss-jacobi"):
        return jacobi_coeffs(m)
    if family in ("chebyshev", "cheb", "mhss-cheb"):
        return chebyshev_coeffs(m, delta)
    raise ValueError(f"unknown polynomial family {family!r}")


def eval_residual_poly(coeffs: RecurrenceCoeffs, lam) -> np.ndarray | float:
    """``r_{m+1}(lam) = 1 - lam s_m(lam)`` via the ``r_n`` recurrence.

    ``r_0 = 1``, ``r_1 = 1 - a'_0 x``, ``r_2 = 1 - x (a'_1 x + b'_1)`` and
    ``r_{n+1} = (a'_n x + b'_n) r_n + c'_n r_{n-1}`` for ``n >= 2``.
    """
    scalar = np.ndim(lam) == 0
    x = np.asarray(lam, dtype=np.float64)
    ap, bp, cp = coeffs.a_prime, coeffs.b_prime, coeffs.c_prime
    r_prev = np.ones_like(x)
    r = 1.0 - ap[0] * x
    if coeffs.degree >= 1:
        r_prev, r = r, 1.0 - x * (ap[1] * x + bp[1])
    for n in range(2, coeffs.degree + 1):
        r_prev, r = r, (ap[n] * x + bp[n]) * r + cp[n] * r_prev
    return float(r) if scalar else r


def eval_sm(coeffs: RecurrenceCoeffs, lam) -> np.ndarray | float:
    """``s_m(lam)`` through the ``s_n`` recurrence (scalar form of the matrix kernel)."""
    scalar = np.ndim(lam) == 0
    x = np.asarray(lam, dtype=np.float64)
    ap, bp, cp = coeffs.a_prime, coeffs.b_prime, coeffs.c_prime
    s_prev = np.zeros_like(x)
    s = np.full_like(x, ap[0])
    if coeffs.degree >= 1:
        s_prev, s = s, ap[1] * x + bp[1]
    for n in range(2, coeffs.degree + 1):
        s_prev, s = s, (ap[n] * x + bp[n]) * s + cp[n] * s_prev - ap[n]
    return float(s) if scalar else s


def stability_roots(a_p, b_p, c_p, lam):
    """Both roots of ``z^2 - (a_p lam + b_p) z - c_p``.

    The larger-magnitude real root is formed without cancellation and the
    other recovered from the product ``-c_p``.  Broadcasts over array input.
    """
    p = np.asarray(a_p, dtype=np.float64) * np.asarray(lam, dtype=np.float64) + np.asarray(b_p)
    cc = np.asarray(c_p, dtype=np.float64)
    p, cc = np.broadcast_arrays(p, cc)
    disc = p * p + 4.0 * cc
    z1 = np.empty(p.shape, dtype=np.complex128)
    z2 = np.empty(p.shape, dtype=np.complex128)

    real = disc >= 0
    sq = np.sqrt(np.where(real, disc, 0.0))
    sign = np.where(p >= 0, 1.0, -1.0)
    big = 0.5 * (p + sign * sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big != 0, -cc / np.where(big != 0, big, 1.0), 0.0)
    z1[real] = big[real]
    z2[real] = small[real]

    cplx = ~real
    im = 0.5 * np.sqrt(np.where(cplx, -disc, 0.0))
    z1[cplx] = 0.5 * p[cplx] + 1j * im[cplx]
    z2[cplx] = 0.5 * p[cplx] - 1j * im[cplx]
    if z1.ndim == 0:
        return complex(z1), complex(z2)
    return z1, z2
