"""Gaussian elimination over Z_p and fraction-free elimination over Z.

The mod-p routines run on numpy arrays: int64 when p < 2**31 (products
stay below 2**62), Python-object arrays otherwise.  Inputs and outputs are
plain lists so callers never see numpy.
"""

from __future__ import annotations

import numpy as np

from ..arith import CRTAccumulator, hadamard_invariant_bound, large_primes
from ..errors import InconsistentSystem, MatrixNonsingular, RankTooSmall
from .matrices import DenseMatrix, LinearOperator, SubmatrixSelector, as_dense

_INT64_PRIME_LIMIT = 1 << 31


def _rows_of(A):
    if isinstance(A, LinearOperator):
        return A.todense().tolist()
    if isinstance(A, DenseMatrix):
        return A.tolist()
    if hasattr(A, "todense"):
        return A.todense().tolist()
    return [list(r) for r in A]


def to_array(rows, p: int) -> np.ndarray:
    if p < _INT64_PRIME_LIMIT:
        return np.array(rows, dtype=np.int64).reshape(len(rows), -1) % p
    X = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, r in enumerate(rows):
        X[i, :] = [int(x) % p for x in r]
    return X


def _tolist(X) -> list:
    return [[int(x) for x in r] for r in X]


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """A @ B mod p without int64 overflow."""
    if A.dtype == object or B.dtype == object:
        return (A.dot(B)) % p
    if A.shape[1] > (1 << 15):
        raise ValueError("inner dimension too large for the split product")
    lo = B & 0xFFFF
    hi = B >> 16
    part_lo = (A @ lo) % p
    part_hi = (A @ hi) % p
    return (part_lo + (part_hi << 16) % p) % p


def _echelon(X: np.ndarray, p: int, reduce_above: bool = False):
    """In-place row echelon form; returns [(original_row, col), ...] pivots."""
    m, n = X.shape
    order = np.arange(m)
    pivots = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(X[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            X[[r, k]] = X[[k, r]]
            order[[r, k]] = order[[k, r]]
        X[r] = X[r] * pow(int(X[r, c]), -1, p) % p
        col = X[:, c].copy()
        col[r] = 0
        if not reduce_above:
            col[:r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            X[rows] = (X[rows] - np.outer(col[rows], X[r])) % p
        pivots.append((int(order[r]), c))
        r += 1
    return pivots


def rank_profile_mod_p(A, p: int):
    """(rank, pivots) where pivots = [(row, col), ...] from elimination."""
    rows = _rows_of(A)
    X = to_array(rows, p)
    pivots = _echelon(X, p)
    return len(pivots), pivots


def rank_mod_p(A, p: int) -> int:
    return rank_profile_mod_p(A, p)[0]


def plu_mod_p(A, p: int):
    """Partial-pivoting LU: A = P L U with P given as `perm`.

    Row k of L U is row perm[k] of A, so (P y)[perm[k]] = y[k].  L is unit
    lower triangular (m x m), U is upper triangular (m x n).  Returns
    (perm, L, U, rank).
    """
    perm, L, U = _plu(_rows_of(A), p)
    return perm, L, U, rank_mod_p(A, p)


def _plu(rows, p: int):
    U = [[int(x) % p for x in r] for r in rows]
    m, n = len(U), len(U[0])
    L = [[int(i == j) for j in range(m)] for i in range(m)]
    perm = list(range(m))
    for k in range(min(m, n)):
        piv = next((i for i in range(k, m) if U[i][k]), None)
        if piv is None:
            continue
        if piv != k:
            U[k], U[piv] = U[piv], U[k]
            perm[k], perm[piv] = perm[piv], perm[k]
            L[k][:k], L[piv][:k] = L[piv][:k], L[k][:k]
        inv = pow(U[k][k], -1, p)
        Uk = U[k]
        for i in range(k + 1, m):
            if U[i][k]:
                f = U[i][k] * inv % p
                L[i][k] = f
                Ui = U[i]
                for j in range(k, n):
                    Ui[j] = (Ui[j] - f * Uk[j]) % p
    return perm, L, U


def permutation_sign(perm) -> int:
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def det_mod_p(A, p: int) -> int:
    perm, _, U = _plu(_rows_of(A), p)
    d = permutation_sign(perm) % p
    for k in range(len(U)):
        d = d * U[k][k] % p
    return d


def solve_mod_p(A, b, p: int) -> list:
    """One solution of A w = b mod p (free variables set to 0).

    Raises InconsistentSystem when b is outside the column space.
    """
    rows = _rows_of(A)
    m, n = len(rows), len(rows[0])
    if len(b) != m:
        raise ValueError("right-hand side has the wrong length")
    X = to_array([list(r) + [int(bi)] for r, bi in zip(rows, b)], p)
    pivots = _echelon(X, p, reduce_above=True)
    w = [0] * n
    for r, (_, c) in enumerate(pivots):
        if c == n:
            raise InconsistentSystem("system has no solution")
        w[c] = int(X[r, n])
    return w


def nullspace_vector(M, p: int) -> list:
    """Non-zero kernel vector; first non-zero entry normalized to 1."""
    rows = _rows_of(M)
    n = len(rows[0])
    X = to_array(rows, p)
    pivots = _echelon(X, p, reduce_above=True)
    pivot_cols = [c for _, c in pivots]
    free = next((c for c in range(n) if c not in set(pivot_cols)), None)
    if free is None:
        raise MatrixNonsingular("matrix has full column rank")
    w = [0] * n
    w[free] = 1
    for r, c in enumerate(pivot_cols):
        w[c] = int(-X[r, free] % p)
    lead = next(x for x in w if x)
    inv = pow(lead, -1, p)
    return [x * inv % p for x in w]


def nullspace_basis(rows, p: int) -> list:
    """Columns of a kernel basis of `rows` (list of n-vectors)."""
    n = len(rows[0])
    X = to_array(rows, p)
    pivots = _echelon(X, p, reduce_above=True)
    pivot_cols = [c for _, c in pivots]
    pset = set(pivot_cols)
    basis = []
    for f in range(n):
        if f in pset:
            continue
        w = [0] * n
        w[f] = 1
        for r, c in enumerate(pivot_cols):
            w[c] = int(-X[r, f] % p)
        basis.append(w)
    return basis


def inverse_mod_p(A, p: int) -> list:
    rows = _rows_of(A)
    n = len(rows)
    X = to_array([list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(rows)], p)
    pivots = _echelon(X, p, reduce_above=True)
    if len(pivots) < n or pivots[-1][1] >= n:
        raise ZeroDivisionError("matrix is singular modulo p")
    return _tolist(X[:, n:])


def find_nonsingular_submatrix(A, r: int, p: int) -> SubmatrixSelector:
    """Rows and columns of an r x r submatrix that is non-singular mod p."""
    rank, pivots = rank_profile_mod_p(A, p)
    if rank < r:
        raise RankTooSmall(f"rank {rank} is below {r}")
    chosen = pivots[:r]
    return SubmatrixSelector(sorted(i for i, _ in chosen), sorted(j for _, j in chosen))


# --- exact integer routines -------------------------------------------------


def integer_rank(A) -> int:
    """Exact rank over Q by fraction-free (Bareiss) elimination."""
    M = [list(r) for r in _rows_of(A)]
    m, n = len(M), len(M[0])
    rank, prev = 0, 1
    for c in range(n):
        if rank == m:
            break
        piv = next((i for i in range(rank, m) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        pr = M[rank]
        pv = pr[c]
        for i in range(rank + 1, m):
            Mi = M[i]
            a = Mi[c]
            for j in range(c + 1, n):
                Mi[j] = (pv * Mi[j] - a * pr[j]) // prev
            Mi[c] = 0
        prev = pv
        rank += 1
    return rank


def integer_rank_multimodular(A, primes: int = 3) -> int:
    """Largest rank modulo a few primes below 2**31; equals the rank w.h.p."""
    rows = _rows_of(A)
    return max(rank_mod_p(rows, q) for q in large_primes(primes, below=1 << 31))


def integer_determinant(A) -> int:
    """det over Z by CRT over word-size primes past twice the Hadamard bound."""
    D = as_dense(A)
    n, n2 = D.shape
    if n != n2:
        raise ValueError("determinant of a non-square matrix")
    norm = D.norm_inf()
    if norm == 0:
        return 0
    target = 2 * hadamard_invariant_bound(n, n, norm) + 1
    acc = CRTAccumulator()
    for q in large_primes(target.bit_length() // 60 + 2):
        acc.add(det_mod_p(D.rows, q), q)
        if acc.modulus > target:
            break
    return acc.balanced()
