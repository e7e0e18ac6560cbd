import numpy as np
import pytest

from mhsspoly.core import ComplexSymSystem, SparseSymMatrix, set_num_threads


def random_semi_spd(rng, n, rank=None, scale=1.0):
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank))
    return scale * (X @ X.T)


def random_pair(rng, n, spd_b=True):
    """Dense semi-SPD pair with B + C SPD."""
    B = random_semi_spd(rng, n, None if spd_b else max(1, n // 2))
    C = random_semi_spd(rng, n, max(1, n // 3), scale=rng.uniform(0.1, 3.0))
    return B, C


def dense_system(B, C, rhs=None):
    n = B.shape[0]
    rhs = np.full(n, 1 + 1j) if rhs is None else rhs
    return ComplexSymSystem(SparseSymMatrix.from_dense(_sym(B)),
                            SparseSymMatrix.from_dense(_sym(C)), rhs)


def _sym(A):
    A = np.asarray(A, dtype=float)
    return (A + A.T) / 2


@pytest.fixture(autouse=True)
def _single_thread():
    set_num_threads(1)
    yield
    set_num_threads(1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
