import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from mhsspoly.core import (ComplexSymSystem, DimensionError, SparseSymMatrix, apply_A,
                           as_complex_vector, bilinear, norm2, set_num_threads, spmv)

from conftest import dense_system, random_pair


def test_spmv_identity():
    v = np.array([1 + 1j, 2, -1j])
    np.testing.assert_array_equal(spmv(SparseSymMatrix.identity(3), v), v)


def test_spmv_two_by_two():
    M = SparseSymMatrix.from_dense([[2, 1], [1, 2]])
    np.testing.assert_allclose(spmv(M, [1, 1]), [3, 3])
    np.testing.assert_allclose(spmv(M, [1 + 1j, -1]), [1 + 2j, -1 + 1j])


def test_spmv_dimension_mismatch():
    with pytest.raises(DimensionError):
        spmv(SparseSymMatrix.identity(3), np.ones(2))


def test_apply_A_examples(rng):
    n = 4
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    s = ComplexSymSystem(SparseSymMatrix.identity(n), SparseSymMatrix.zeros(n), np.ones(n))
    np.testing.assert_allclose(apply_A(s, x), x)
    s = ComplexSymSystem(SparseSymMatrix.identity(n), SparseSymMatrix.identity(n), np.ones(n))
    np.testing.assert_allclose(apply_A(s, np.ones(n)), (1 + 1j) * np.ones(n))


def test_apply_A_matches_dense(rng):
    B, C = random_pair(rng, 5)
    s = dense_system(B, C)
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    ref = s.dense() @ x
    assert np.linalg.norm(apply_A(s, x) - ref) <= 1e-14 * np.linalg.norm(ref) * 10


def test_bilinear_is_unconjugated():
    assert bilinear([1j], [1j]) == -1
    assert bilinear([1, 1j], [1, 1j]) == 0
    assert bilinear([1 + 1j, 2], [3, -1j]) == 3 + 1j
    with pytest.raises(DimensionError):
        bilinear([1, 2], [1])


def test_norm2():
    assert norm2(np.zeros(3)) == 0
    assert norm2([3 + 4j]) == 5
    assert norm2(np.full(8, 1 + 1j)) == pytest.approx(4.0)


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError, match="finite"):
        SparseSymMatrix.from_dense([[1, np.nan], [np.nan, 1]])
    with pytest.raises(ValueError, match="not symmetric"):
        SparseSymMatrix.from_dense([[1, 2], [3, 1]])
    with pytest.raises(ValueError, match="structurally"):
        SparseSymMatrix(2, [0, 2, 3], [0, 1, 1], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="duplicate"):
        SparseSymMatrix(2, [0, 2, 3], [0, 0, 1], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="out of range"):
        SparseSymMatrix(2, [0, 1, 2], [0, 2], [1.0, 1.0])
    with pytest.raises(ValueError):
        as_complex_vector([1, np.inf])


def test_matrix_is_immutable():
    M = SparseSymMatrix.identity(3)
    with pytest.raises(ValueError):
        M.values[0] = 2.0


def test_padded_and_scaled():
    M = SparseSymMatrix.from_dense([[2, 1], [1, 2]])
    P = M.padded(3)
    np.testing.assert_array_equal(P.toarray(), [[2, 1, 0], [1, 2, 0], [0, 0, 0]])
    S = M.scaled(np.array([1.0, 2.0]))
    np.testing.assert_array_equal(S.toarray(), [[2, 2], [2, 8]])


def test_check_semi_spd():
    good = dense_system(np.eye(2), np.eye(2))
    good.check_semi_spd()
    bad = dense_system(np.diag([1.0, -1.0]), np.eye(2))
    with pytest.raises(ValueError, match="negative diagonal"):
        bad.check_semi_spd()


def test_threaded_spmv_is_identical(rng):
    A = sp.random(300, 300, density=0.05, random_state=1)
    M = SparseSymMatrix.from_scipy(A + A.T)
    v = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    ref = M.matvec(v)
    set_num_threads(4)
    np.testing.assert_array_equal(M.matvec(v), ref)


vectors = st.integers(1, 30).flatmap(
    lambda n: st.tuples(*[st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n)] * 4))


@given(vectors)
def test_bilinear_symmetric(parts):
    u = np.array(parts[0]) + 1j * np.array(parts[1])
    v = np.array(parts[2]) + 1j * np.array(parts[3])
    assert bilinear(u, v) == pytest.approx(bilinear(v, u), rel=1e-12, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_A_is_complex_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    B, C = random_pair(rng, n)
    s = dense_system(B, C)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lhs = bilinear(apply_A(s, u), v)
    rhs = bilinear(u, apply_A(s, v))
    normA = np.linalg.norm(s.dense(), 2)
    assert abs(lhs - rhs) <= 1e-12 * normA * np.linalg.norm(u) * np.linalg.norm(v)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 50), st.floats(0.05, 1.0), st.integers(0, 2**31 - 1))
def test_spmv_matches_dense(n, density, seed):
    rng = np.random.default_rng(seed)
    A = sp.random(n, n, density=density, random_state=seed, format="csr")
    A = A + A.T
    M = SparseSymMatrix.from_scipy(A)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ref = A.toarray() @ v
    assert np.linalg.norm(spmv(M, v) - ref) <= 1e-13 * max(np.linalg.norm(ref), 1e-300) + 1e-300
