"""Exact dense/sparse matrices and the counted blackbox operator."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from ..errors import DimensionMismatch


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major exact matrix over Z (modulus None) or Z_p."""

    rows: tuple
    modulus: Optional[int] = None

    def __init__(self, rows, modulus=None):
        rows = tuple(tuple(int(x) for x in r) for r in rows)
        if not rows or not rows[0]:
            raise DimensionMismatch("matrix dimensions must be positive")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise DimensionMismatch("ragged rows")
        if modulus is not None:
            rows = tuple(tuple(x % modulus for x in r) for r in rows)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "modulus", modulus)

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0])

    def tolist(self) -> list:
        return [list(r) for r in self.rows]

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def norm_inf(self) -> int:
        return max(abs(x) for r in self.rows for x in r)

    def nnz(self) -> int:
        return sum(1 for r in self.rows for x in r if x)

    def mod(self, p: int) -> DenseMatrix:
        return DenseMatrix(self.rows, p)

    def transpose(self) -> DenseMatrix:
        return DenseMatrix(zip(*self.rows), self.modulus)

    def is_symmetric(self) -> bool:
        m, n = self.shape
        return m == n and all(self.rows[i][j] == self.rows[j][i] for i in range(n) for j in range(i))

    def triplets(self):
        for i, r in enumerate(self.rows):
            for j, x in enumerate(r):
                if x:
                    yield i, j, x

    def todense(self) -> DenseMatrix:
        return self


@dataclass(frozen=True)
class SparseMatrix:
    """Triplet storage sorted by (row, col); no duplicates, no stored zeros."""

    nrows: int
    ncols: int
    entries: tuple
    modulus: Optional[int] = None
    _by_row: tuple = field(default=(), repr=False, compare=False)

    def __init__(self, nrows, ncols, entries, modulus=None):
        if nrows < 1 or ncols < 1:
            raise DimensionMismatch("matrix dimensions must be positive")
        acc = {}
        for i, j, v in entries:
            i, j, v = int(i), int(j), int(v)
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise DimensionMismatch(f"entry ({i}, {j}) outside {nrows}x{ncols}")
            if (i, j) in acc:
                raise ValueError(f"duplicate entry ({i}, {j})")
            acc[i, j] = v % modulus if modulus is not None else v
        items = tuple((i, j, v) for (i, j), v in sorted(acc.items()) if v)
        by_row = [[] for _ in range(nrows)]
        for i, j, v in items:
            by_row[i].append((j, v))
        object.__setattr__(self, "nrows", nrows)
        object.__setattr__(self, "ncols", ncols)
        object.__setattr__(self, "entries", items)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "_by_row", tuple(tuple(r) for r in by_row))

    @property
    def shape(self):
        return self.nrows, self.ncols

    def nnz(self) -> int:
        return len(self.entries)

    def norm_inf(self) -> int:
        return max((abs(v) for _, _, v in self.entries), default=0)

    def triplets(self):
        return iter(self.entries)

    def mod(self, p: int) -> SparseMatrix:
        return SparseMatrix(self.nrows, self.ncols, self.entries, p)

    def todense(self) -> DenseMatrix:
        rows = [[0] * self.ncols for _ in range(self.nrows)]
        for i, j, v in self.entries:
            rows[i][j] = v
        return DenseMatrix(rows, self.modulus)

    def tolist(self) -> list:
        return self.todense().tolist()

    @classmethod
    def from_dense(cls, M) -> SparseMatrix:
        M = as_dense(M)
        m, n = M.shape
        return cls(m, n, M.triplets(), M.modulus)


def as_dense(M, modulus=None) -> DenseMatrix:
    if isinstance(M, DenseMatrix):
        return M if modulus is None or modulus == M.modulus else M.mod(modulus)
    if isinstance(M, SparseMatrix):
        D = M.todense()
        return D if modulus is None else D.mod(modulus)
    if isinstance(M, LinearOperator):
        return M.todense()
    return DenseMatrix(M, modulus)


def identity(n: int, modulus=None) -> DenseMatrix:
    return DenseMatrix([[int(i == j) for j in range(n)] for i in range(n)], modulus)


def companion_matrix(f) -> list:
    """Companion block of monic f: ones on the subdiagonal, last column -f_0..-f_{d-1}."""
    d = len(f) - 1
    C = [[0] * d for _ in range(d)]
    for i in range(1, d):
        C[i][i - 1] = 1
    for i in range(d):
        C[i][d - 1] = -f[i]
    return C


def block_companion(factors, modulus=None) -> DenseMatrix:
    n = sum(len(f) - 1 for f in factors)
    F = [[0] * n for _ in range(n)]
    off = 0
    for f in factors:
        C = companion_matrix(f)
        d = len(C)
        for i in range(d):
            F[off + i][off : off + d] = C[i]
        off += d
    return DenseMatrix(F, modulus)


def mat_vec(rows, v, p=None) -> list:
    if p is None:
        return [sum(a * b for a, b in zip(r, v)) for r in rows]
    return [sum(a * b for a, b in zip(r, v)) % p for r in rows]


def mat_mul(A, B, p=None) -> list:
    Bt = list(zip(*B))
    if p is None:
        return [[sum(a * b for a, b in zip(r, c)) for c in Bt] for r in A]
    return [[sum(a * b for a, b in zip(r, c)) % p for c in Bt] for r in A]


class LinearOperator:
    """A matrix known only through x -> A x, with cost counters.

    `matvec_count` and `scalar_op_count` only grow; every call to
    :meth:`matvec` adds one product and `cost` scalar operations.  Provers
    use :meth:`apply_uncounted` or :meth:`todense` so verifier accounting
    stays clean.
    """

    def __init__(self, shape, apply: Callable, *, modulus=None, cost=None, source=None,
                 encoding: Optional[Callable[[], bytes]] = None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.modulus = modulus
        self._apply = apply
        m, n = self.shape
        self.cost = 2 * m * n if cost is None else cost
        self.source = source
        self._encoding = encoding
        self.matvec_count = 0
        self.scalar_op_count = 0
        self._lock = threading.Lock()

    @property
    def rows(self):
        return self.shape[0]

    @property
    def cols(self):
        return self.shape[1]

    def matvec(self, v: Sequence[int]) -> list:
        if len(v) != self.shape[1]:
            raise DimensionMismatch(f"vector of length {len(v)} for a {self.shape[0]}x{self.shape[1]} operator")
        out = self._apply(v)
        with self._lock:
            self.matvec_count += 1
            self.scalar_op_count += self.cost
        return out

    __matmul__ = matvec

    def apply_uncounted(self, v) -> list:
        return self._apply(v)

    def todense(self) -> DenseMatrix:
        """Densify by probing unit vectors (uncounted)."""
        if self.source is not None:
            D = as_dense(self.source)
            return D if self.modulus is None else D.mod(self.modulus)
        m, n = self.shape
        cols = []
        for j in range(n):
            e = [0] * n
            e[j] = 1
            cols.append(self._apply(e))
        return DenseMatrix([[cols[j][i] for j in range(n)] for i in range(m)], self.modulus)

    def encoding(self) -> bytes:
        if self._encoding is not None:
            return self._encoding()
        return encode_matrix(self.todense())

    def counters(self) -> tuple:
        return self.matvec_count, self.scalar_op_count


def encode_matrix(M) -> bytes:
    """Canonical bytes: dimensions, then non-zero triplets in row-major order."""
    if isinstance(M, LinearOperator):
        return M.encoding()
    m, n = M.shape
    parts = [f"{m} {n}"]
    parts.extend(f"{i},{j},{v}" for i, j, v in M.triplets())
    return ";".join(parts).encode()


def aslinearoperator(M, modulus=None) -> LinearOperator:
    """Wrap a Dense/Sparse matrix (or nested list) as a counted operator.

    With `modulus`, entries and outputs are reduced modulo that prime.
    """
    if isinstance(M, LinearOperator):
        return M
    if not isinstance(M, (DenseMatrix, SparseMatrix)):
        M = DenseMatrix(M)
    if modulus is not None:
        M = M.mod(modulus)
    p = M.modulus
    m, n = M.shape
    if isinstance(M, SparseMatrix):
        by_row = M._by_row

        def apply(v):
            if p is None:
                return [sum(x * v[j] for j, x in r) for r in by_row]
            return [sum(x * v[j] for j, x in r) % p for r in by_row]

        cost = 2 * M.nnz()
    else:
        rows = M.rows

        def apply(v):
            return mat_vec(rows, v, p)

        cost = 2 * m * n
    return LinearOperator((m, n), apply, modulus=p, cost=cost, source=M,
                          encoding=lambda: encode_matrix(M))


def matvec(A: LinearOperator, v) -> list:
    return A.matvec(v)


def reduced_operator(A: LinearOperator, p: int) -> LinearOperator:
    """Apply A over Z, then reduce the output modulo p."""

    def apply(v):
        return [x % p for x in A.matvec(v)]

    m, n = A.shape
    return LinearOperator(A.shape, apply, modulus=p, cost=m,
                          source=A.source, encoding=A.encoding)


@dataclass(frozen=True)
class SubmatrixSelector:
    row_indices: tuple
    col_indices: tuple

    def __init__(self, row_indices, col_indices):
        rows, cols = tuple(int(i) for i in row_indices), tuple(int(j) for j in col_indices)
        for idx in (rows, cols):
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise ValueError("selector indices must be strictly increasing")
        object.__setattr__(self, "row_indices", rows)
        object.__setattr__(self, "col_indices", cols)

    @property
    def size(self):
        return len(self.row_indices), len(self.col_indices)

    def check_within(self, shape) -> None:
        m, n = shape
        if any(not 0 <= i < m for i in self.row_indices) or any(not 0 <= j < n for j in self.col_indices):
            raise DimensionMismatch("selector index outside the matrix")


def submatrix_operator(A: LinearOperator, sel: SubmatrixSelector) -> LinearOperator:
    """x -> (A scatter(x))[rows]: the selected submatrix, still blackbox."""
    sel.check_within(A.shape)
    rows, cols = sel.row_indices, sel.col_indices
    n = A.shape[1]

    def scatter(x):
        full = [0] * n
        for j, xj in zip(cols, x):
            full[j] = xj
        return full

    def apply(x):
        y = A.matvec(scatter(x))
        return [y[i] for i in rows]

    def apply_uncounted(x):
        y = A.apply_uncounted(scatter(x))
        return [y[i] for i in rows]

    def encoding():
        return A.encoding() + b"|rows:" + ",".join(map(str, rows)).encode() + b"|cols:" + ",".join(map(str, cols)).encode()

    op = LinearOperator((len(rows), len(cols)), apply, modulus=A.modulus,
                        cost=len(rows) + len(cols), encoding=encoding)
    op.apply_uncounted = apply_uncounted
    op.parent = A
    op.selector = sel
    if A.source is not None:
        src = as_dense(A.source)
        op.source = DenseMatrix([[src.rows[i][j] for j in cols] for i in rows], A.modulus) if rows and cols else None
    return op
