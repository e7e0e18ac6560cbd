import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mhsspoly.core import ComplexSymSystem, SparseSymMatrix, apply_A
from mhsspoly.harness.problems import synthetic_problem
from mhsspoly.krylov import cocg
from mhsspoly.orthopoly import make_coeffs
from mhsspoly.polyprecond import apply_polynomial_P_inverse
from mhsspoly.precond import PRECONDITIONERS, build_preconditioner
from mhsspoly.scaling import apply_scaling, compute_scaling

LINEAR_KINDS = ["none", "ilu0", "mhss-exact", "mhss-ilu0", "mhss-cheb", "mhss-jacobi"]


def _scaled(kind, n, seed=0):
    sysm = synthetic_problem(kind, n, seed=seed)
    return apply_scaling(sysm, compute_scaling(sysm.B, sysm.C))


@pytest.fixture(scope="module")
def small_system():
    return _scaled("laplacian2d", 64)


@pytest.fixture(scope="module")
def system_1024():
    return _scaled("laplacian2d", 1024)


def test_names_and_unknown(small_system):
    assert set(LINEAR_KINDS) < set(PRECONDITIONERS)
    with pytest.raises(ValueError, match="unknown preconditioner"):
        build_preconditioner(small_system, "mhss-sor")


def test_none_is_identity_copy():
    sysm = ComplexSymSystem(SparseSymMatrix.identity(3), SparseSymMatrix.zeros(3), np.ones(3))
    pre = build_preconditioner(sysm, "none")
    r = np.array([1 + 1j, 2, 3])
    out = pre(r)
    np.testing.assert_array_equal(out, r)
    assert out is not r
    assert pre.applications == 1


def test_mhss_exact_inverts_P(small_system, rng):
    pre = build_preconditioner(small_system, "mhss-exact")
    r = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    h = pre(r)
    Ph = (1 + 1j) * small_system.M.matvec(h)
    assert np.linalg.norm(Ph - r) <= 1e-12 * np.linalg.norm(r)
    assert pre.describe()["inner"]["kind"] == "dense-cholesky"


def test_ilu0_is_exact_without_fill(rng):
    n = 30
    B = SparseSymMatrix.from_scipy(sp.diags([-1, 4, -1], [-1, 0, 1], shape=(n, n)).tocsr())
    C = SparseSymMatrix.diag(rng.uniform(0.1, 1, n))
    sysm = ComplexSymSystem(B, C, np.ones(n))
    pre = build_preconditioner(sysm, "ilu0")
    r = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    np.testing.assert_allclose(apply_A(sysm, pre(r)), r, atol=1e-12)
    assert pre.describe()["shift"] == 0.0


@pytest.mark.parametrize("kind", ["mhss-cheb", "mhss-jacobi"])
def test_polynomial_matches_direct_call(small_system, kind, rng):
    pre = build_preconditioner(small_system, kind, degree=20, delta=0.3)
    r = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    ref = apply_polynomial_P_inverse(small_system.M, make_coeffs(kind.split("-")[1], 20, 0.3), r)
    np.testing.assert_array_equal(pre(r), ref)
    d = pre.describe()
    assert d["coefficients"]["degree"] == 20


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(LINEAR_KINDS), st.integers(0, 2**31 - 1))
def test_linearity(kind, seed):
    sysm = _scaled("laplacian2d", 49, seed=seed % 7)
    pre = build_preconditioner(sysm, kind, degree=30)
    rng = np.random.default_rng(seed)
    u, w = rng.standard_normal((2, 49)) + 1j * rng.standard_normal((2, 49))
    a = complex(*rng.standard_normal(2))
    lhs = pre(a * u + w)
    rhs = a * pre(u) + pre(w)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (abs(a) * np.linalg.norm(pre(u)) + np.linalg.norm(pre(w)))


def test_ilu0_pcg_is_approximate(small_system, rng):
    pre = build_preconditioner(small_system, "mhss-ilu0-pcg", inner_tol=1e-6)
    r = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    h = pre(r)
    Ph = (1 + 1j) * small_system.M.matvec(h)
    assert np.linalg.norm(Ph - r) <= 1e-5 * np.linalg.norm(r)
    assert pre.inner.inner_iterations > 0


def _iterations(system, kind, degree=50):
    pre = build_preconditioner(system, kind, degree=degree)
    _, rep = cocg(lambda x: apply_A(system, x), system.rhs, pre, tol=1e-8)
    assert rep.converged
    return rep.iterations


def test_iterations_decrease_with_degree(system_1024):
    its = {m: _iterations(system_1024, "mhss-jacobi", m) for m in (10, 50, 100)}
    assert its[100] <= its[50] <= its[10]


@pytest.mark.slow
def test_high_degree_floor(system_1024):
    exact = _iterations(system_1024, "mhss-exact")
    assert _iterations(system_1024, "mhss-jacobi", 1000) >= exact - 2


def test_cocg_with_inexact_inner_solves(system_1024):
    pre = build_preconditioner(system_1024, "mhss-ilu0-pcg", inner_tol=1e-6)
    x, rep = cocg(lambda v: apply_A(system_1024, v), system_1024.rhs, pre, tol=1e-8, maxit=200)
    assert rep.converged
    true = np.linalg.norm(system_1024.rhs - apply_A(system_1024, x))
    assert true <= 1e-7 * np.linalg.norm(system_1024.rhs)
