"""Matrix Market coordinate I/O for real symmetric matrices."""

from __future__ import annotations

import gzip
import io
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from ..core import SparseSymMatrix

__all__ = [
    "MatrixMarketError",
    "HeaderError",
    "UnsupportedFieldError",
    "EntryError",
    "IndexOutOfRange",
    "NotSymmetricError",
    "read_matrix_market",
    "write_matrix_market",
]


class MatrixMarketError(ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        where = f"{path}:" if path else ""
        where += f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.path = path


class HeaderError(MatrixMarketError):
    """Missing or malformed banner or size line."""


class UnsupportedFieldError(MatrixMarketError):
    """Field or format other than real/integer coordinate data."""


class EntryError(MatrixMarketError):
    """An entry line that does not parse as ``row col value``."""


class IndexOutOfRange(MatrixMarketError):
    pass


class NotSymmetricError(MatrixMarketError):
    pass


def _open_text(path: Path):
    if path.suffix == ".gz":
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="ascii", errors="replace")
    return open(path, encoding="ascii", errors="replace")


def read_matrix_market(path) -> SparseSymMatrix:
    """Read a real symmetric matrix from a Matrix Market coordinate file.

    ``symmetric`` files must list only the lower triangle; entries are
    mirrored.  ``general`` files are accepted when the assembled matrix is
    symmetric.  Repeated entries are summed.  ``.gz`` files are decompressed
    transparently.
    """
    path = Path(path)
    with _open_text(path) as fh:
        banner = fh.readline()
        lineno = 1
        parts = banner.split()
        if len(parts) != 5 or parts[0].lower() != "%%matrixmarket":
            raise HeaderError("expected '%%MatrixMarket matrix coordinate <field> <symmetry>'",
                              lineno, path)
        obj, fmt, fld, sym = (p.lower() for p in parts[1:])
        if obj != "matrix":
            raise HeaderError(f"object must be 'matrix', got {obj!r}", lineno, path)
        if fmt != "coordinate":
            raise UnsupportedFieldError(f"format {fmt!r} not supported, need 'coordinate'",
                                        lineno, path)
        if fld not in ("real", "integer", "double"):
            raise UnsupportedFieldError(f"field {fld!r} not supported, need 'real'", lineno, path)
        if sym not in ("symmetric", "general"):
            raise UnsupportedFieldError(f"symmetry {sym!r} not supported", lineno, path)

        line = fh.readline()
        lineno += 1
        while line and (line.startswith("%") or not line.strip()):
            line = fh.readline()
            lineno += 1
        try:
            nrows, ncols, nnz = (int(t) for t in line.split())
        except ValueError:
            raise HeaderError(f"bad size line {line.strip()!r}", lineno, path) from None
        if nrows != ncols:
            raise HeaderError(f"matrix is {nrows}x{ncols}, not square", lineno, path)
        if nrows < 0 or nnz < 0:
            raise HeaderError("negative size", lineno, path)

        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        k = 0
        for line in fh:
            lineno += 1
            s = line.strip()
            if not s or s.startswith("%"):
                continue
            if k >= nnz:
                raise EntryError(f"more than the declared {nnz} entries", lineno, path)
            tok = s.split()
            if len(tok) != 3:
                raise EntryError(f"expected 'row col value', got {s!r}", lineno, path)
            try:
                i, j, v = int(tok[0]), int(tok[1]), float(tok[2])
            except ValueError:
                raise EntryError(f"cannot parse {s!r}", lineno, path) from None
            if not (1 <= i <= nrows and 1 <= j <= ncols):
                raise IndexOutOfRange(f"index ({i}, {j}) outside {nrows}x{ncols}", lineno, path)
            if sym == "symmetric" and j > i:
                raise NotSymmetricError(
                    f"entry ({i}, {j}) above the diagonal in a symmetric file", lineno, path)
            if not np.isfinite(v):
                raise EntryError(f"non-finite value {tok[2]!r}", lineno, path)
            rows[k], cols[k], vals[k] = i - 1, j - 1, v
            k += 1
        if k != nnz:
            raise EntryError(f"declared {nnz} entries, found {k}", lineno, path)

    if sym == "symmetric":
        off = rows != cols
        rows, cols, vals = (np.concatenate([rows, cols[off]]), np.concatenate([cols, rows[off]]),
                            np.concatenate([vals, vals[off]]))
    A = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, nrows)).tocsr()
    A.sum_duplicates()
    if sym == "general":
        D = abs(A - A.T)
        if D.nnz and D.max() > 0:
            raise NotSymmetricError("'general' matrix is not symmetric", None, path)
    return SparseSymMatrix.from_scipy(A)


def write_matrix_market(path, M: SparseSymMatrix, comment: str = "") -> None:
    """Write the lower triangle of ``M`` as a symmetric coordinate file."""
    L = M.lower().tocoo()
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wt") as fh:
        fh.write("%%MatrixMarket matrix coordinate real symmetric\n")
        for c in comment.splitlines():
            fh.write(f"% {c}\n")
        fh.write(f"{M.n} {M.n} {L.nnz}\n")
        order = np.lexsort((L.row, L.col))
        for i, j, v in zip(L.row[order], L.col[order], L.data[order]):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
