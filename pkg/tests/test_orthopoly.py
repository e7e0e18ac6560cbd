import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mhsspoly.orthopoly import (BaseRecurrence, DegenerateRecurrence, RecurrenceCoeffs,
                                cheb_epsilon_from_delta, closed_cheb_coeffs,
                                closed_jacobi_coeffs, eval_residual_poly, eval_sm,
                                lemma_transform, make_coeffs, stability_roots)


def _rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))


# -- Jacobi family ----------------------------------------------------------


def test_jacobi_base_cases_exact():
    c = closed_jacobi_coeffs(5)
    assert c.a0_prime == 1.5
    assert c.a1_prime == -10 / 3
    assert c.b1_prime == 4.0
    t = lemma_transform(BaseRecurrence.jacobi(5), 5)
    assert t.a0_prime == pytest.approx(1.5, rel=1e-15)
    assert t.a1_prime == pytest.approx(-10 / 3, rel=1e-15)
    assert t.b1_prime == pytest.approx(4.0, rel=1e-15)


def test_jacobi_base_recurrence_values():
    base = BaseRecurrence.jacobi(3)
    assert base.b[0] == pytest.approx(-2 / 3)
    assert base.b[1] == pytest.approx(-8 / 15)
    assert base.c[1] == pytest.approx(-1 / 18)


def test_gamma_one_both_forms():
    t = lemma_transform(BaseRecurrence.jacobi(3), 3)
    assert t.gamma[1] == pytest.approx(-20 / 9, rel=1e-14)
    n = 1
    assert -4 + 2 * (3 * n + 5) / (n + 2) ** 2 == pytest.approx(-20 / 9, rel=1e-15)


def test_jacobi_n2_values():
    c = closed_jacobi_coeffs(2)
    assert c.a_prime[2] == pytest.approx(-2.625, rel=1e-15)
    assert c.b_prime[2] == pytest.approx(1.35, rel=1e-15)
    assert c.c_prime[2] == pytest.approx(-0.35, rel=1e-14)


def test_jacobi_limits():
    c = closed_jacobi_coeffs(10**6)
    assert c.a_prime[-1] == pytest.approx(-4, abs=1e-5)
    assert c.b_prime[-1] == pytest.approx(2, abs=1e-5)
    assert c.c_prime[-1] == pytest.approx(-1, abs=1e-5)


def test_closed_jacobi_matches_transform():
    m = 1000
    closed = closed_jacobi_coeffs(m)
    t = lemma_transform(BaseRecurrence.jacobi(m), m)
    for name in ("a_prime", "b_prime", "gamma"):
        assert _rel(getattr(t, name), getattr(closed, name)) <= 1e-12
    assert _rel(t.c_prime[2:], closed.c_prime[2:]) <= 1e-12


def test_jacobi_residual_matches_base_ratio():
    m = 5
    base = BaseRecurrence.jacobi(m + 1)
    expected = base.evaluate(m + 1, 1.0) / base.evaluate(m + 1, 0.0)
    got = eval_residual_poly(closed_jacobi_coeffs(m), 1.0)
    assert got == pytest.approx(expected, rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("m", range(0, 9))
def test_jacobi_least_squares_monomial_oracle(m):
    """Minimise int_0^1 (1 - x s(x))^2 over s of degree m in the monomial basis, in high precision."""
    with mpmath.workdps(60):
        G = mpmath.matrix(m + 1, m + 1)
        h = mpmath.matrix(m + 1, 1)
        for j in range(m + 1):
            h[j] = mpmath.mpf(1) / (j + 2)
            for k in range(m + 1):
                G[j, k] = mpmath.mpf(1) / (j + k + 3)
        coef = mpmath.lu_solve(G, h)
        xs = np.linspace(0, 1, 401)
        ref = np.array([float(1 - x * sum(coef[j] * mpmath.mpf(x) ** j for j in range(m + 1)))
                        for x in xs])
    got = eval_residual_poly(closed_jacobi_coeffs(m), xs)
    assert np.max(np.abs(got - ref)) <= 1e-8


# -- Chebyshev family -------------------------------------------------------


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_closed_cheb_matches_transform(eps):
    m = 500
    closed = closed_cheb_coeffs(eps, m)
    t = lemma_transform(BaseRecurrence.chebyshev(eps, m), m)
    assert _rel(t.a_prime, closed.a_prime) <= 1e-10
    assert _rel(t.b_prime[1:], closed.b_prime[1:]) <= 1e-10
    assert _rel(t.c_prime[2:], closed.c_prime[2:]) <= 1e-10


def test_cheb_quarter_example():
    eps = 0.25
    base = BaseRecurrence.chebyshev(eps, 3)
    assert base.a[0] == pytest.approx(8 / 3)
    assert base.b[0] == pytest.approx(-5 / 3)
    # T_2(0) = 2 b T_1(0) - 1 with T_1(0) = b
    assert base.evaluate(2, 0.0) == pytest.approx(41 / 9, rel=1e-15)
    assert 2 * base.b[0] * base.b[0] - 1 == pytest.approx(41 / 9, rel=1e-15)
    c = closed_cheb_coeffs(eps, 3)
    assert c.gamma[1] == pytest.approx(-15 / 41, rel=1e-15)


@pytest.mark.parametrize("eps_frac", [Fraction(1, 4), Fraction(1, 9), Fraction(1, 16),
                                      Fraction(4, 9)])
def test_cheb_gamma_against_exact_rationals(eps_frac):
    root = Fraction(math.isqrt(eps_frac.numerator), math.isqrt(eps_frac.denominator))
    c = (root - 1) / (root + 1)
    coeffs = closed_cheb_coeffs(float(eps_frac), 40)
    for n in range(41):
        exact = (c**n + c**-n) / (c ** (n + 1) + c ** -(n + 1))
        assert coeffs.gamma[n] == pytest.approx(float(exact), rel=2e-15)


def test_cheb_gamma_no_overflow():
    coeffs = closed_cheb_coeffs(1e-8, 5000)
    assert np.all(np.isfinite(coeffs.gamma))


def test_cheb_a0_at_design_epsilon():
    eps = cheb_epsilon_from_delta(0.2, 10)
    assert closed_cheb_coeffs(eps, 10).a0_prime == pytest.approx(1.9787, abs=5e-5)


def test_epsilon_from_delta_example():
    eps = cheb_epsilon_from_delta(0.2, 10)
    absc = ((1 + math.sqrt(1 - 0.04)) / 0.2) ** (1 / 11)
    assert absc == pytest.approx(1.2317, abs=1e-4)
    assert eps == pytest.approx(((absc - 1) / (absc + 1)) ** 2, rel=1e-13)
    assert eps == pytest.approx(0.01078, abs=5e-6)


def test_epsilon_decreases_with_degree():
    eps = [cheb_epsilon_from_delta(0.2, m) for m in range(0, 300)]
    assert all(a > b for a, b in zip(eps, eps[1:]))


def test_epsilon_vanishes_as_delta_tends_to_one():
    for m in (1, 10, 100):
        assert cheb_epsilon_from_delta(1 - 1e-12, m) < 1e-10


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.1, 1.5])
def test_epsilon_rejects_bad_delta(delta):
    with pytest.raises(ValueError):
        cheb_epsilon_from_delta(delta, 10)


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.5])
def test_closed_cheb_rejects_bad_epsilon(eps):
    with pytest.raises(ValueError):
        closed_cheb_coeffs(eps, 3)


def test_cheb_band_m10():
    c = make_coeffs("chebyshev", 10, 0.2)
    lam = np.linspace(c.epsilon, 1, 2000)
    assert np.max(np.abs(eval_residual_poly(c, lam))) <= 0.2 + 1e-9


@pytest.mark.parametrize("m", [1, 2, 5, 10, 20, 30])
def test_cheb_equioscillation(m):
    c = make_coeffs("chebyshev", m, 0.2)
    theta = np.linspace(0, np.pi, 40001)
    lam = (1 + c.epsilon) / 2 + (1 - c.epsilon) / 2 * np.cos(theta)
    r = eval_residual_poly(c, lam)
    interior = (np.abs(r[1:-1]) >= np.abs(r[:-2])) & (np.abs(r[1:-1]) >= np.abs(r[2:]))
    idx = np.concatenate([[0], np.flatnonzero(interior) + 1, [r.size - 1]])
    peaks = r[idx][np.abs(np.abs(r[idx]) - 0.2) <= 1e-6]
    signs = np.sign(peaks)
    alternations = 1 + np.count_nonzero(signs[1:] != signs[:-1]) if peaks.size else 0
    assert alternations >= m


# -- evaluation and roots ---------------------------------------------------


@pytest.mark.parametrize("family", ["jacobi", "chebyshev"])
@pytest.mark.parametrize("m", [0, 1, 2, 7, 50, 100])
def test_residual_is_one_at_zero(family, m):
    assert eval_residual_poly(make_coeffs(family, m), 0.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("family", ["jacobi", "chebyshev"])
def test_residual_at_zero_high_degree(family):
    # at lam = 0 the recurrence has roots 1 and gamma^2 ~ 1 - 4 sqrt(eps); rounding
    # accumulates like m / (1 - gamma^2) ulps rather than staying at one ulp
    m = 1000
    assert eval_residual_poly(make_coeffs(family, m), 0.0) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("family", ["jacobi", "chebyshev"])
def test_sm_and_residual_consistent(family):
    c = make_coeffs(family, 25)
    lam = np.linspace(1e-3, 1, 101)
    np.testing.assert_allclose(1 - lam * eval_sm(c, lam), eval_residual_poly(c, lam),
                               atol=1e-12)


def test_jacobi_stability_example():
    z1, z2 = stability_roots(-10 / 3, 4, -5 / 27, 1.0)
    assert z1 * z2 == pytest.approx(5 / 27, rel=1e-14)
    assert abs(z1) ** 2 == pytest.approx(5 / 27, rel=1e-14)
    assert z1.imag != 0


def test_jacobi_roots_near_zero_are_real_and_inside():
    c = closed_jacobi_coeffs(500)
    n = np.arange(2, 501)
    z1, z2 = stability_roots(c.a_prime[n], c.b_prime[n], c.c_prime[n], 1e-9)
    assert np.all(z1.imag == 0) and np.all(z2.imag == 0)
    assert np.all(np.abs(z1) < 1) and np.all(np.abs(z2) < 1)


def test_cheb_roots_at_zero():
    eps = 0.05
    c = closed_cheb_coeffs(eps, 30)
    base = BaseRecurrence.chebyshev(eps, 32)
    for n in range(2, 31):
        z1, z2 = stability_roots(c.a_prime[n], c.b_prime[n], c.c_prime[n], 0.0)
        big, small = sorted((z1, z2), key=abs, reverse=True)
        assert big == pytest.approx(1.0, rel=1e-12)
        ratio = base.evaluate(n - 1, 0.0) / base.evaluate(n + 1, 0.0)
        assert small == pytest.approx(ratio, rel=1e-10)
        assert abs(small) < 1


def test_roots_quadratic_identity():
    rng = np.random.default_rng(0)
    a, b, c, lam = rng.standard_normal((4, 200))
    z1, z2 = stability_roots(a, b, c, lam)
    p = a * lam + b
    for z in (z1, z2):
        assert np.max(np.abs(z * z - p * z - c)) <= 1e-12 * (1 + np.max(np.abs(p)) ** 2)


@pytest.mark.parametrize("family,eps", [("jacobi", None), ("chebyshev", 0.3),
                                        ("chebyshev", 0.05), ("chebyshev", 0.005)])
def test_root_modulus_sweep(family, eps):
    m = 2000
    c = closed_jacobi_coeffs(m) if family == "jacobi" else closed_cheb_coeffs(eps, m)
    lam = np.linspace(1e-6, 1, 200)
    n = np.arange(2, m + 1)[:, None]
    z1, z2 = stability_roots(c.a_prime[n], c.b_prime[n], c.c_prime[n], lam[None, :])
    assert max(np.abs(z1).max(), np.abs(z2).max()) < 1


# -- structure and errors ---------------------------------------------------


def test_degenerate_recurrence_names_index():
    base = BaseRecurrence(np.ones(3), np.array([0.0, 1.0, 1.0]), np.array([0.0, -1.0, -1.0]))
    with pytest.raises(DegenerateRecurrence) as info:
        lemma_transform(base, 2)
    assert info.value.n == 0
    base = BaseRecurrence(np.ones(3), np.array([1.0, 1.0, 1.0]), np.array([0.0, -1.0, -1.0]))
    with pytest.raises(DegenerateRecurrence) as info:
        lemma_transform(base, 2)
    assert info.value.n == 1


def test_base_recurrence_rejects_zero_c():
    with pytest.raises(ValueError):
        BaseRecurrence(np.ones(3), np.ones(3), np.array([0.0, 0.0, 1.0]))


def test_coeff_lengths_checked():
    with pytest.raises(ValueError):
        RecurrenceCoeffs("x", 2, np.ones(2), np.ones(3), np.ones(3), np.ones(3))
    with pytest.raises(ValueError):
        RecurrenceCoeffs("x", 1, np.ones(2), np.array([0, np.nan]), np.ones(2), np.ones(2))


def test_make_coeffs_names():
    assert make_coeffs("mhss-jacobi", 3).family == "jacobi"
    assert make_coeffs("mhss-cheb", 3).family == "chebyshev"
    with pytest.raises(ValueError):
        make_coeffs("legendre", 3)


def test_coefficients_are_immutable():
    c = closed_jacobi_coeffs(4)
    with pytest.raises(ValueError):
        c.a_prime[0] = 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 300), st.floats(0.01, 0.95))
def test_cheb_design_band_property(m, delta):
    c = make_coeffs("chebyshev", m, delta)
    lam = np.linspace(c.epsilon, 1, 500)
    assert np.max(np.abs(eval_residual_poly(c, lam))) <= delta * (1 + 1e-9) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 400), st.floats(1e-4, 0.9))
def test_cheb_closed_vs_transform_property(m, eps):
    closed = closed_cheb_coeffs(eps, m)
    t = lemma_transform(BaseRecurrence.chebyshev(eps, m), m)
    assert _rel(t.a_prime, closed.a_prime) <= 1e-10
