"""Frobenius (rational canonical) form modulo p and over the integers.

Mod p, the form is built one cyclic block at a time: find a vector whose
minimal polynomial f is the minimal polynomial of the current matrix,
take its Krylov space K, and split off the A-invariant complement

    W = {x : phi(A^i x) = 0 for i < deg f},

where phi vanishes on the first deg f - 1 Krylov vectors and is 1 on the
last.  Recursing on A restricted to W yields the invariant factors largest
first.  Blocks are returned smallest first, so F = diag(C(f_1), ..., C(f_k))
with f_1 | f_2 | ... | f_k.
"""

from __future__ import annotations

import math
import random

from ..arith import (CRTAccumulator, ceil_sqrt, large_primes, poly_divmod_monic, poly_mul,
                     rpoly_divmod, rpoly_gcd, rpoly_mul)
from .elimination import _rows_of, inverse_mod_p, nullspace_basis, solve_mod_p
from .matrices import DenseMatrix, block_companion, mat_mul, mat_vec


def vector_minpoly(A, v, p: int):
    """Minimal polynomial of v under A (monic, low degree first) and its Krylov vectors."""
    n = len(v)
    basis = []  # (pivot, reduced vector with pivot 1, combination as polynomial)
    krylov = []
    u = [x % p for x in v]
    k = 0
    while True:
        krylov.append(u)
        r = list(u)
        combo = [0] * k + [1]
        for piv, b, bc in basis:
            c = r[piv]
            if c:
                r = [(x - c * y) % p for x, y in zip(r, b)]
                for i, y in enumerate(bc):
                    combo[i] = (combo[i] - c * y) % p
        piv = next((i for i in range(n) if r[i]), None)
        if piv is None:
            return combo, krylov[:k]
        inv = pow(r[piv], -1, p)
        basis.append((piv, [x * inv % p for x in r], [x * inv % p for x in combo]))
        u = mat_vec(A, u, p)
        k += 1


def poly_apply(A, q, v, p: int) -> list:
    """q(A) v by Horner's rule."""
    out = [0] * len(v)
    for c in reversed(q):
        out = [(x + c * y) % p for x, y in zip(mat_vec(A, out, p), v)]
    return out


def _split_lcm(f, g, p: int):
    """Coprime a | f, b | g with a * b = lcm(f, g)."""
    a = f
    b = rpoly_divmod(g, rpoly_gcd(f, g, p), p)[0]
    while True:
        d = rpoly_gcd(a, b, p)
        if len(d) == 1:
            return a, b
        a = rpoly_divmod(a, d, p)[0]
        b = rpoly_mul(b, d, p)


def maximal_vector(A, p: int):
    """A vector whose minimal polynomial is the minimal polynomial of A."""
    n = len(A)
    v = [1] + [0] * (n - 1)
    f, kr = vector_minpoly(A, v, p)
    for i in range(1, n):
        if len(f) - 1 == n:
            break
        e = [0] * n
        e[i] = 1
        g, _ = vector_minpoly(A, e, p)
        if not rpoly_divmod(f, g, p)[1]:
            continue
        a, b = _split_lcm(f, g, p)
        v1 = poly_apply(A, rpoly_divmod(f, a, p)[0], v, p)
        v2 = poly_apply(A, rpoly_divmod(g, b, p)[0], e, p)
        v = [(x + y) % p for x, y in zip(v1, v2)]
        f, kr = vector_minpoly(A, v, p)
    return v, f, kr


def _split(B, p, f, krylov):
    """Invariant complement of the Krylov space; None if it is not invariant."""
    d = len(B)
    k = len(f) - 1
    e_last = [0] * k
    e_last[-1] = 1
    phi = solve_mod_p(krylov, e_last, p)
    R = [phi]
    for _ in range(k - 1):
        prev = R[-1]
        R.append([sum(prev[i] * B[i][j] for i in range(d)) % p for j in range(d)])
    W = nullspace_basis(R, p)
    P = [[vec[i] for vec in krylov + W] for i in range(d)]
    Pinv = inverse_mod_p(P, p)
    Bp = mat_mul(mat_mul(Pinv, B, p), P, p)
    if any(Bp[i][j] for i in range(k, d) for j in range(k)) or any(Bp[i][j] for i in range(k) for j in range(k, d)):
        return None
    return W, [row[k:] for row in Bp[k:]]


def _decompose(A, p, rng):
    """List of (factor, ambient Krylov vectors), largest factor first; None on failure."""
    n = len(A)
    current = [list(r) for r in A]
    basis = None  # ambient coordinates of the current subspace; None = identity
    blocks = []
    while current:
        d = len(current)
        if rng is not None:
            v = [rng.randrange(p) for _ in range(d)]
            f, kr = vector_minpoly(current, v, p)
        else:
            v, f, kr = maximal_vector(current, p)
        k = len(f) - 1
        if k == 0 or blocks and rpoly_divmod(blocks[-1][0], f, p)[1]:
            return None

        def ambient(u):
            if basis is None:
                return list(u)
            return [sum(u[j] * basis[j][i] for j in range(d)) % p for i in range(n)]

        blocks.append((f, [ambient(u) for u in kr]))
        if k == d:
            break
        split = _split(current, p, f, kr)
        if split is None:
            return None
        W, current = split
        basis = [ambient(w) for w in W]
    return blocks


def invariant_factors_mod_p(A, p: int, _with_vectors=False):
    A = [[x % p for x in r] for r in _rows_of(A)]
    rng = random.Random(p * 1000003 + len(A))
    blocks = None
    for _ in range(2):
        blocks = _decompose(A, p, rng)
        if blocks is not None:
            break
    if blocks is None:
        blocks = _decompose(A, p, None)
    blocks.reverse()
    if _with_vectors:
        return blocks
    return [f for f, _ in blocks]


def frobenius_form_mod_p(A, p: int):
    """(F, S, T) over Z_p with S F T = A and S T = I; F block companion."""
    blocks = invariant_factors_mod_p(A, p, _with_vectors=True)
    factors = [f for f, _ in blocks]
    cols = [u for _, vecs in blocks for u in vecs]
    n = len(cols)
    S = [[cols[j][i] for j in range(n)] for i in range(n)]
    T = inverse_mod_p(S, p)
    F = block_companion(factors, p)
    return F, DenseMatrix(S, p), DenseMatrix(T, p)


def determinantal_degrees(factors, n: int) -> tuple:
    """deg D_1, ..., deg D_n of the Smith form given the invariant factors."""
    degs = [0] * (n - len(factors)) + [len(f) - 1 for f in factors]
    out, acc = [], 0
    for d in degs:
        acc += d
        out.append(acc)
    return tuple(out)


def invariant_factor_coefficient_bound(n: int, norm_inf: int) -> int:
    """Bound on |coefficient| of any monic factor of charpoly(A), ||A||_max = norm_inf."""
    total = 0
    for k in range(n + 1):
        # sum of k x k principal minors: C(n, k) * k^(k/2) * B^k
        ck = math.comb(n, k) * ceil_sqrt(k**k * norm_inf ** (2 * k))
        total += ck * ck
    return (1 << n) * ceil_sqrt(total)


def frobenius_form_integer(A):
    """Invariant factors over Q (monic, integral) and the block companion F."""
    D = A if isinstance(A, DenseMatrix) else DenseMatrix(_rows_of(A))
    n = D.shape[0]
    if D.shape[1] != n:
        raise ValueError("Frobenius form of a non-square matrix")
    norm = D.norm_inf()
    if norm == 0:
        factors = [[0, 1] for _ in range(n)]
        return factors, block_companion(factors)
    target = 2 * invariant_factor_coefficient_bound(n, norm) + 1
    best = None
    accs = None
    used = 0
    for q in large_primes(4 * (target.bit_length() // 60 + 2)):
        factors_q = invariant_factors_mod_p(D.rows, q)
        key = determinantal_degrees(factors_q, n)
        if best is None or key < best:
            best = key
            accs = [[CRTAccumulator() for _ in f] for f in factors_q]
            used = 0
        elif key != best:
            continue
        for acc_f, f in zip(accs, factors_q):
            for acc, c in zip(acc_f, f):
                acc.add(c, q)
        used += 1
        if accs[0][0].modulus > target:
            break
    factors = [[acc.balanced() for acc in acc_f] for acc_f in accs]
    for f, g in zip(factors, factors[1:]):
        if poly_divmod_monic(g, f)[1]:
            raise ArithmeticError("reconstructed invariant factors do not divide")
    return factors, block_companion(factors)


def charpoly_integer(A) -> list:
    factors, _ = frobenius_form_integer(A)
    g = [1]
    for f in factors:
        g = poly_mul(g, f)
    return g


def minpoly_integer(A) -> list:
    return frobenius_form_integer(A)[0][-1]
