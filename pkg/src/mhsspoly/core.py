"""
Real sparse symmetric matrices and the complex-vector kernels shared by
every solver in the package.

Complex vectors are plain ``complex128`` numpy arrays.  Matrices are always
real; the imaginary structure of a system lives in the ``(B, C)`` pair of
:class:`ComplexSymSystem`.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "DimensionError",
    "SparseSymMatrix",
    "ComplexSymSystem",
    "as_complex_vector",
    "spmv",
    "apply_A",
    "bilinear",
    "norm2",
    "set_num_threads",
    "get_num_threads",
]

_NUM_THREADS = 1


class DimensionError(ValueError):
    """Operand sizes do not agree."""


def set_num_threads(n: int) -> None:
    """Set the number of row blocks ``spmv`` may process concurrently.

    The default of 1 gives a single sequential row sweep.  Rows are
    independent, so results are identical for any thread count.
    """
    global _NUM_THREADS
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _NUM_THREADS = int(n)


def get_num_threads() -> int:
    return _NUM_THREADS


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class SparseSymMatrix:
    """Real symmetric matrix in compressed-row storage, both triangles kept.

    Parameters
    ----------
    n : int
        Number of rows and columns.
    row_offsets, col_indices, values : array_like
        Standard CSR arrays.  Column indices are sorted within each row on
        construction.
    check : bool
        Verify structural and numerical symmetry, index ranges, duplicate
        columns and finiteness.  Only disable for matrices produced by
        operations that preserve these properties.

    Instances are immutable.
    """

    __slots__ = ("n", "row_offsets", "col_indices", "values", "_csr", "_blocks")

    def __init__(self, n, row_offsets, col_indices, values, *, check=True):
        n = int(n)
        A = sp.csr_matrix(
            (np.asarray(values, dtype=np.float64),
             np.asarray(col_indices, dtype=np.int64),
             np.asarray(row_offsets, dtype=np.int64)),
            shape=(n, n),
        )
        if check:
            _validate(A)
        A.sort_indices()
        self.n = n
        self.row_offsets = _frozen(A.indptr)
        self.col_indices = _frozen(A.indices)
        self.values = _frozen(A.data)
        self._csr = A
        self._blocks = {}

    # construction helpers -------------------------------------------------

    @classmethod
    def from_scipy(cls, A, *, check=True) -> "SparseSymMatrix":
        A = sp.csr_matrix(A, dtype=np.float64)
        if A.shape[0] != A.shape[1]:
            raise DimensionError(f"matrix is not square: {A.shape}")
        A.sum_duplicates()
        return cls(A.shape[0], A.indptr, A.indices, A.data, check=check)

    @classmethod
    def from_dense(cls, A) -> "SparseSymMatrix":
        return cls.from_scipy(sp.csr_matrix(np.asarray(A, dtype=np.float64)))

    @classmethod
    def identity(cls, n: int) -> "SparseSymMatrix":
        return cls.from_scipy(sp.identity(n, format="csr"))

    @classmethod
    def zeros(cls, n: int) -> "SparseSymMatrix":
        return cls(n, np.zeros(n + 1, dtype=np.int64), [], [], check=False)

    @classmethod
    def diag(cls, d) -> "SparseSymMatrix":
        return cls.from_scipy(sp.diags(np.asarray(d, dtype=np.float64), format="csr"))

    # views ----------------------------------------------------------------

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_scipy(self) -> sp.csr_matrix:
        """Return a copy as a ``scipy.sparse.csr_matrix``."""
        return self._csr.copy()

    def toarray(self) -> np.ndarray:
        return self._csr.toarray()

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def lower(self) -> sp.csr_matrix:
        """Lower triangle (diagonal included) as CSR with sorted indices."""
        L = sp.tril(self._csr, format="csr")
        L.sort_indices()
        return L

    def abs_row_sums(self) -> np.ndarray:
        return np.asarray(abs(self._csr).sum(axis=1)).ravel()

    # arithmetic -----------------------------------------------------------

    def __add__(self, other: "SparseSymMatrix") -> "SparseSymMatrix":
        if not isinstance(other, SparseSymMatrix):
            return NotImplemented
        if other.n != self.n:
            raise DimensionError(f"cannot add {self.n}x{self.n} and {other.n}x{other.n}")
        S = (self._csr + other._csr).tocsr()
        return SparseSymMatrix(self.n, S.indptr, S.indices, S.data, check=False)

    def scaled(self, s) -> "SparseSymMatrix":
        """Return ``diag(s) @ self @ diag(s)`` on the same sparsity pattern."""
        s = np.asarray(s, dtype=np.float64)
        if s.shape != (self.n,):
            raise DimensionError(f"scaling vector has length {s.size}, expected {self.n}")
        rows = np.repeat(np.arange(self.n), np.diff(self.row_offsets))
        vals = s[rows] * self.values * s[self.col_indices]
        return SparseSymMatrix(self.n, self.row_offsets, self.col_indices, vals, check=False)

    def padded(self, n: int) -> "SparseSymMatrix":
        """Embed top-left in an ``n x n`` zero matrix."""
        if n < self.n:
            raise DimensionError(f"cannot pad {self.n} rows down to {n}")
        offsets = np.concatenate(
            [self.row_offsets, np.full(n - self.n, self.row_offsets[-1])])
        return SparseSymMatrix(n, offsets, self.col_indices, self.values, check=False)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Product with a real or complex vector, or a block of columns.

        Complex input is processed as an ``(n, 2)`` real block so the real and
        imaginary parts go through the same real kernel.
        """
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise DimensionError(f"matrix has {self.n} columns, vector has {x.shape[0]} entries")
        if np.iscomplexobj(x):
            xc = np.ascontiguousarray(x, dtype=np.complex128)
            block = xc.view(np.float64).reshape(xc.shape[0], -1)
            y = self._real_product(block)
            return np.ascontiguousarray(y).view(np.complex128).reshape(xc.shape)
        return self._real_product(np.asarray(x, dtype=np.float64))

    def _real_product(self, x):
        nt = _NUM_THREADS
        if nt == 1 or self.n < 2 * nt:
            return self._csr @ x
        blocks = self._row_blocks(nt)
        with ThreadPoolExecutor(max_workers=nt) as pool:
            parts = list(pool.map(lambda blk: blk @ x, blocks))
        return np.concatenate(parts, axis=0)

    def _row_blocks(self, nt):
        if nt not in self._blocks:
            edges = np.linspace(0, self.n, nt + 1).astype(int)
            self._blocks[nt] = [self._csr[a:b] for a, b in zip(edges[:-1], edges[1:])]
        return self._blocks[nt]

    def __matmul__(self, x):
        return self.matvec(x)

    def __repr__(self):
        return f"SparseSymMatrix(n={self.n}, nnz={self.nnz})"


def _validate(A: sp.csr_matrix) -> None:
    n = A.shape[0]
    if not np.all(np.isfinite(A.data)):
        raise ValueError("matrix values must be finite")
    if np.any(np.diff(A.indptr) < 0) or A.indptr[0] != 0 or A.indptr[-1] != A.data.size:
        raise ValueError("row offsets must be nondecreasing, start at 0 and end at nnz")
    if A.indices.size and (A.indices.min() < 0 or A.indices.max() >= n):
        raise ValueError("column index out of range")
    A.sort_indices()
    same = np.flatnonzero(A.indices[1:] == A.indices[:-1]) + 1
    starts = np.zeros(A.indices.size, dtype=bool)
    starts[A.indptr[:-1][A.indptr[:-1] < A.indices.size]] = True
    dup = same[~starts[same]]
    if dup.size:
        row = int(np.searchsorted(A.indptr, dup[0], side="right") - 1)
        raise ValueError(f"duplicate column in row {row}")
    T = A.T.tocsr()
    T.sort_indices()
    if not (np.array_equal(A.indptr, T.indptr) and np.array_equal(A.indices, T.indices)):
        raise ValueError("matrix is not structurally symmetric")
    if not np.array_equal(A.data, T.data):
        raise ValueError("matrix values are not symmetric")


def as_complex_vector(v, n: int | None = None) -> np.ndarray:
    """Validate and convert to a 1-D ``complex128`` array."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise DimensionError(f"vector has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


@dataclass(frozen=True)
class ComplexSymSystem:
    """The system ``(B + iC) x = rhs`` with ``B``, ``C`` real symmetric."""

    B: SparseSymMatrix
    C: SparseSymMatrix
    rhs: np.ndarray

    def __post_init__(self):
        if self.B.n != self.C.n:
            raise DimensionError(f"B is {self.B.n}x{self.B.n} but C is {self.C.n}x{self.C.n}")
        rhs = as_complex_vector(self.rhs, self.B.n)
        rhs.setflags(write=False)
        object.__setattr__(self, "rhs", rhs)

    @property
    def n(self) -> int:
        return self.B.n

    @property
    def M(self) -> SparseSymMatrix:
        """``B + C``, the real SPD matrix behind the MHSS preconditioner."""
        return self.B + self.C

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return apply_A(self, x)

    def with_rhs(self, rhs) -> "ComplexSymSystem":
        return ComplexSymSystem(self.B, self.C, rhs)

    def dense(self) -> np.ndarray:
        return self.B.toarray() + 1j * self.C.toarray()

    def check_semi_spd(self) -> None:
        """Cheap necessary condition: no negative diagonal entry in B or C."""
        for name, mat in (("B", self.B), ("C", self.C)):
            d = mat.diagonal()
            if np.any(d < 0):
                i = int(np.argmin(d))
                raise ValueError(f"{name} has negative diagonal entry {d[i]} at row {i}")


def spmv(M: SparseSymMatrix, v) -> np.ndarray:
    """``M @ v`` for a real symmetric ``M`` and complex ``v``."""
    return M.matvec(as_complex_vector(v, M.n))


def apply_A(system: ComplexSymSystem, x) -> np.ndarray:
    """``(B + iC) x`` from one real-block product with each of B and C."""
    x = np.asarray(x, dtype=np.complex128)
    if x.shape != (system.n,):
        raise DimensionError(f"vector has shape {x.shape}, system has size {system.n}")
    return system.B.matvec(x) + 1j * system.C.matvec(x)


def bilinear(u, v) -> complex:
    """Unconjugated form ``sum_k u_k v_k``; ``bilinear(i, i) == -1``."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise DimensionError(f"shapes differ: {u.shape} vs {v.shape}")
    return complex(np.dot(u, v))


def norm2(v) -> float:
    return float(np.linalg.norm(v))
