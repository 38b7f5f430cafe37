import itertools
import random
import threading

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from certilin.arith import ceil_log2, poly_mul, rpoly_divmod
from certilin.errors import DimensionMismatch, InconsistentSystem, MatrixNonsingular, RankTooSmall
from certilin.linalg import (DenseMatrix, SparseMatrix, SubmatrixSelector, aslinearoperator,
                             block_companion, charpoly_integer, companion_matrix, det_mod_p,
                             encode_matrix, find_nonsingular_submatrix, frobenius_form_integer,
                             frobenius_form_mod_p, identity, integer_determinant, integer_rank,
                             integer_rank_multimodular, invariant_factors_mod_p, inverse_mod_p,
                             mat_mul, matvec, minpoly_integer, nullspace_basis, nullspace_vector,
                             plu_mod_p, rank_mod_p, reduced_operator, solve_mod_p, submatrix_operator)
from certilin.linalg.butterfly import (ButterflyNetwork, ButterflySwitch, butterfly_apply,
                                       butterfly_apply_block, butterfly_sample,
                                       butterfly_transpose_apply, butterfly_transpose_apply_block,
                                       butterfly_wiring)


def rand_matrix(rng, m, n, p=None, lo=-9, hi=9):
    if p is not None:
        return [[rng.randrange(p) for _ in range(n)] for _ in range(m)]
    return [[rng.randint(lo, hi) for _ in range(n)] for _ in range(m)]


def low_rank(rng, m, n, r, p):
    L = rand_matrix(rng, m, r, p)
    R = rand_matrix(rng, r, n, p)
    return mat_mul(L, R, p) if r else [[0] * n for _ in range(m)]


class Counter:
    scalar = 0


# --- operators --------------------------------------------------------------------


def test_matvec_examples():
    assert matvec(aslinearoperator(identity(3)), [1, 2, 3]) == [1, 2, 3]
    A = aslinearoperator([[1, 2], [3, 4]])
    assert A.matvec([1, 1]) == [3, 7]
    with pytest.raises(DimensionMismatch):
        aslinearoperator([[1, 2, 3], [4, 5, 6]]).matvec([1, 2])


def test_matvec_counters():
    A = aslinearoperator(SparseMatrix(3, 3, [(0, 0, 2), (1, 2, 5), (2, 1, -1)]), modulus=7)
    assert A.counters() == (0, 0)
    assert A.matvec([1, 1, 1]) == [2, 5, 6]
    assert A.counters() == (1, 6)
    A.apply_uncounted([1, 0, 0])
    assert A.counters() == (1, 6)


def test_counters_are_thread_safe():
    A = aslinearoperator(identity(4))
    threads = [threading.Thread(target=lambda: [A.matvec([1, 2, 3, 4]) for _ in range(200)]) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert A.counters()[0] == 800


def test_sparse_dense_agree():
    rng = random.Random(2)
    for _ in range(20):
        rows = rand_matrix(rng, 5, 7)
        S = SparseMatrix(5, 7, [(i, j, v) for i, r in enumerate(rows) for j, v in enumerate(r) if v])
        assert S.todense().tolist() == rows
        v = [rng.randint(-5, 5) for _ in range(7)]
        assert aslinearoperator(S).matvec(v) == aslinearoperator(rows).matvec(v)
        assert S.norm_inf() == DenseMatrix(rows).norm_inf()


def test_encoding_is_canonical():
    rows = [[0, 2], [3, 0]]
    S = SparseMatrix(2, 2, [(1, 0, 3), (0, 1, 2)])
    assert encode_matrix(DenseMatrix(rows)) == encode_matrix(S)
    assert encode_matrix(DenseMatrix(rows)) != encode_matrix(DenseMatrix([[0, 2], [3, 1]]))


def test_submatrix_operator():
    rows = [[1, 2, 3], [4, 5, 6], [7, 8, 10]]
    A = aslinearoperator(rows, modulus=101)
    sel = SubmatrixSelector((0, 2), (1, 2))
    B = submatrix_operator(A, sel)
    assert B.shape == (2, 2)
    assert B.matvec([1, 1]) == [5, 18]
    assert A.counters()[0] == 1


def test_reduced_operator():
    A = aslinearoperator([[10, -3], [7, 2]])
    R = reduced_operator(A, 5)
    assert R.matvec([1, 1]) == [2, 4]
    assert A.counters()[0] == 1


# --- butterflies ------------------------------------------------------------------


def test_butterfly_switch_counts():
    rng = random.Random(0)
    assert butterfly_sample(1, 11, rng).switches == ()
    two = butterfly_sample(2, 11, rng)
    assert len(two.switches) == 1 and (two.switches[0].i, two.switches[0].j) == (0, 1)
    four = butterfly_sample(4, 11, rng)
    assert len(four.switches) == 4
    assert butterfly_wiring(4) == [(0, 1), (2, 3), (0, 2), (1, 3)]


@pytest.mark.parametrize("m", range(1, 40))
def test_butterfly_count_with_padding(m):
    size = 1 << ceil_log2(m)
    full = butterfly_wiring(m)
    expected = sum(1 for i, j in _full_wiring(size) if j < m)
    assert len(full) == expected
    assert len(full) <= size * ceil_log2(size) // 2
    U = butterfly_sample(m, 101, random.Random(m))
    c = Counter()
    c.scalar = 0
    butterfly_apply(U, list(range(m)), 101, c)
    assert c.scalar <= 3 * len(U.switches)


def _full_wiring(size):
    out = []
    span = 1
    while span < size:
        for base in range(0, size, 2 * span):
            for t in range(span):
                out.append((base + t, base + t + span))
        span *= 2
    return out


def test_butterfly_apply_examples():
    zero = ButterflyNetwork(2, (ButterflySwitch(0, 0, 1),))
    assert butterfly_apply(zero, [3, 4]) == [3, 7]
    assert butterfly_transpose_apply(zero, [3, 4]) == [7, 4]
    one = ButterflyNetwork(2, (ButterflySwitch(1, 0, 1),))
    assert butterfly_apply(one, [1, 0], 7) == [1, 1]
    empty = ButterflyNetwork(3, ())
    assert butterfly_apply(empty, [1, 2, 3]) == [1, 2, 3]
    assert butterfly_transpose_apply(empty, [1, 2, 3]) == [1, 2, 3]


def test_butterfly_transpose_adjoint():
    rng = random.Random(5)
    p = 101
    for _ in range(200):
        m = rng.randint(1, 17)
        U = butterfly_sample(m, p, rng)
        x = [rng.randrange(p) for _ in range(m)]
        y = [rng.randrange(p) for _ in range(m)]
        lhs = sum(a * b for a, b in zip(butterfly_apply(U, x, p), y)) % p
        rhs = sum(a * b for a, b in zip(x, butterfly_transpose_apply(U, y, p))) % p
        assert lhs == rhs


def test_butterfly_block_matches_vector_apply():
    rng = random.Random(6)
    p = 97
    U = butterfly_sample(6, p, rng)
    X = np.array(rand_matrix(rng, 6, 3, p), dtype=np.int64)
    Y = butterfly_apply_block(U, X, p)
    for j in range(3):
        assert [int(v) for v in Y[:, j]] == butterfly_apply(U, [int(v) for v in X[:, j]], p)


def test_butterfly_transpose_block_matches_vector_apply():
    rng = random.Random(7)
    p = 97
    for m in (1, 3, 6, 11):
        U = butterfly_sample(m, p, rng)
        X = np.array(rand_matrix(rng, m, 2, p), dtype=np.int64)
        Y = butterfly_transpose_apply_block(U, X, p)
        for j in range(2):
            assert [int(v) for v in Y[:, j]] == butterfly_transpose_apply(U, [int(v) for v in X[:, j]], p)


def _network_matrix(U, m, p, apply):
    cols = [apply(U, [int(i == j) for i in range(m)], p) for j in range(m)]
    return [[cols[j][i] for j in range(m)] for i in range(m)]


def _plucker_span(m, r, p, rng, lead):
    # rank of the r x r minors of lead(network) over many samples; full rank means no fixed
    # rank-r input can make the leading block singular for every choice of switches
    subsets = list(itertools.combinations(range(m), r))
    rows = []
    for _ in range(len(subsets) + 3):
        T = lead(butterfly_sample(m, p, rng))
        rows.append([det_mod_p([[T[i][j] for j in I] for i in range(r)], p) for I in subsets])
    return rank_mod_p(rows, p), len(subsets)


@pytest.mark.parametrize("m", range(1, 7))
def test_butterfly_rows_and_transposed_columns_are_generic(m):
    p = 1000003
    rng = random.Random(m)
    for r in range(1, m + 1):
        rows_of_u = lambda U: _network_matrix(U, m, p, butterfly_apply)[:r]
        cols_of_ut = lambda U: [list(c) for c in zip(*_network_matrix(U, m, p, butterfly_transpose_apply))][:r]
        got, want = _plucker_span(m, r, p, rng, rows_of_u)
        assert got == want, (m, r)
        got, want = _plucker_span(m, r, p, rng, cols_of_ut)
        assert got == want, (m, r)


def test_butterfly_leading_column_is_fixed():
    # why columns are preconditioned with U^T: U e_0 never depends on the switches
    rng = random.Random(9)
    for m in (3, 4, 7):
        U = butterfly_sample(m, 101, rng)
        assert butterfly_apply(U, [1] + [0] * (m - 1), 101) == [1] * m


def test_butterfly_payload_roundtrip():
    U = butterfly_sample(7, 101, random.Random(1))
    assert ButterflyNetwork.from_payload(7, U.to_payload()) == U


def test_butterfly_switches_leading_block():
    # with high probability a random butterfly moves r independent rows up front
    rng = random.Random(8)
    p = 10007
    hits = 0
    for _ in range(100):
        A = [[0] * 8 for _ in range(8)]
        rows = rng.sample(range(8), 3)
        for k, i in enumerate(rows):
            A[i][k] = 1
        U = butterfly_sample(8, p, rng)
        cols = [butterfly_apply(U, [A[i][j] for i in range(8)], p) for j in range(3)]
        lead = [[cols[j][i] for j in range(3)] for i in range(3)]
        hits += rank_mod_p(lead, p) == 3
    assert hits >= 95


# --- elimination ------------------------------------------------------------------


def test_plu_examples():
    perm, L, U, r = plu_mod_p([[1, 0], [0, 1]], 5)
    assert (perm, L, U, r) == ([0, 1], [[1, 0], [0, 1]], [[1, 0], [0, 1]], 2)
    assert plu_mod_p([[1, 1], [1, 1]], 7)[3] == 1
    assert plu_mod_p([[0, 0], [0, 0]], 7)[3] == 0


def test_plu_reconstructs():
    rng = random.Random(1)
    for t in range(200):
        p = (2, 5, 101)[t % 3]
        n = rng.randint(1, 8)
        A = rand_matrix(rng, n, n, p) if t % 4 else low_rank(rng, n, n, rng.randint(0, n), p)
        perm, L, U, r = plu_mod_p(A, p)
        assert sorted(perm) == list(range(n))
        assert all(L[i][i] == 1 and all(L[i][j] == 0 for j in range(i + 1, n)) for i in range(n))
        assert all(U[i][j] == 0 for i in range(n) for j in range(i))
        LU = mat_mul(L, U, p)
        assert all(LU[k] == [x % p for x in A[perm[k]]] for k in range(n))
        assert r == rank_mod_p(A, p)


def test_det_mod_p_against_sympy():
    rng = random.Random(2)
    for _ in range(100):
        n = rng.randint(1, 6)
        A = rand_matrix(rng, n, n)
        assert det_mod_p(A, 101) == int(sympy.Matrix(A).det()) % 101


def test_solve_examples():
    assert solve_mod_p([[1, 0], [0, 1]], [4, 2], 5) == [4, 2]
    assert solve_mod_p([[2, 1], [1, 1]], [1, 1], 7) == [0, 1]
    with pytest.raises(InconsistentSystem):
        solve_mod_p([[1, 1], [1, 1]], [1, 0], 7)


def test_nullspace_examples():
    assert nullspace_vector([[0]], 7) == [1]
    assert nullspace_vector([[1, 2], [2, 4]], 7) == [1, 3]
    with pytest.raises(MatrixNonsingular):
        nullspace_vector([[1, 0], [0, 1]], 5)


@settings(max_examples=200)
@given(st.integers(1, 6), st.integers(0, 10**6), st.sampled_from([2, 3, 7, 101]))
def test_nullspace_property(n, seed, p):
    rng = random.Random(seed)
    M = low_rank(rng, n, n, rng.randint(0, n - 1), p)
    w = nullspace_vector(M, p)
    assert any(w)
    assert all(sum(a * b for a, b in zip(row, w)) % p == 0 for row in M)
    assert next(x for x in w if x) == 1
    for v in nullspace_basis(M, p):
        assert all(sum(a * b for a, b in zip(row, v)) % p == 0 for row in M)


def test_inverse_mod_p():
    rng = random.Random(4)
    for _ in range(50):
        A = rand_matrix(rng, 4, 4, 101)
        if rank_mod_p(A, 101) < 4:
            continue
        assert mat_mul(A, inverse_mod_p(A, 101), 101) == identity(4).tolist()


def test_find_nonsingular_submatrix():
    I3 = identity(3).tolist()
    sel = find_nonsingular_submatrix(I3, 2, 5)
    sub = [[I3[i][j] for j in sel.col_indices] for i in sel.row_indices]
    assert rank_mod_p(sub, 5) == 2
    assert find_nonsingular_submatrix([[1, 1], [1, 1]], 1, 7) == SubmatrixSelector((0,), (0,))
    with pytest.raises(RankTooSmall):
        find_nonsingular_submatrix([[1, 1], [1, 1]], 2, 7)


def test_integer_rank_and_det_against_sympy():
    rng = random.Random(9)
    for _ in range(200):
        m, n = rng.randint(1, 6), rng.randint(1, 6)
        A = rand_matrix(rng, m, n) if rng.random() < 0.5 else low_rank(rng, m, n, rng.randint(0, min(m, n)), None)
        assert integer_rank(A) == sympy.Matrix(A).rank()
        assert integer_rank_multimodular(A) == integer_rank(A)
        if m == n:
            assert integer_determinant(A) == sympy.Matrix(A).det()


def test_rank_mod_p_against_sympy():
    rng = random.Random(10)
    for _ in range(200):
        m, n = rng.randint(1, 8), rng.randint(1, 8)
        A = low_rank(rng, m, n, rng.randint(0, min(m, n)), 101)
        assert rank_mod_p(A, 101) == _rank_gf(A, 101)


def _rank_gf(A, p):
    from sympy import GF
    from sympy.polys.matrices import DomainMatrix
    return DomainMatrix([[GF(p)(x) for x in row] for row in A], (len(A), len(A[0])), GF(p)).rank()


# --- Frobenius --------------------------------------------------------------------


def test_frobenius_mod_p_examples():
    C = companion_matrix([1, 0, 1])
    F, S, T = frobenius_form_mod_p(C, 5)
    assert F.tolist() == [[x % 5 for x in r] for r in C]
    assert mat_mul(mat_mul(S.tolist(), F.tolist(), 5), T.tolist(), 5) == [[x % 5 for x in r] for r in C]
    F, _, _ = frobenius_form_mod_p([[1, 0], [0, 1]], 5)
    assert F.tolist() == [[1, 0], [0, 1]]
    assert invariant_factors_mod_p([[1, 0], [0, 1]], 5) == [[4, 1], [4, 1]]
    F, _, _ = frobenius_form_mod_p([[1, 0], [0, 2]], 5)
    assert F.tolist() == block_companion([[2, -3, 1]], 5).tolist()


def test_frobenius_mod_p_identities():
    rng = random.Random(12)
    for t in range(200):
        p = (2, 3, 7, 101)[t % 4]
        n = rng.randint(1, 6)
        if t % 3 == 0:
            # repeated invariant factors
            k = rng.randint(1, n)
            A = [[(rng.randrange(1, p) if i == j else 0) for j in range(n)] for i in range(n)]
            for i in range(k):
                A[i][i] = 1
        else:
            A = rand_matrix(rng, n, n, p)
        F, S, T = frobenius_form_mod_p(A, p)
        assert mat_mul(S.tolist(), T.tolist(), p) == identity(n).tolist()
        assert mat_mul(mat_mul(S.tolist(), F.tolist(), p), T.tolist(), p) == [[x % p for x in r] for r in A]
        factors = invariant_factors_mod_p(A, p)
        assert F.tolist() == block_companion(factors, p).tolist()
        for f, g in zip(factors, factors[1:]):
            assert rpoly_divmod(g, f, p)[1] == []
        assert sum(len(f) - 1 for f in factors) == n


def test_frobenius_integer_examples():
    assert frobenius_form_integer([[1, 0], [0, 1]])[0] == [[-1, 1], [-1, 1]]
    assert frobenius_form_integer([[0, 1], [1, 0]])[0] == [[-1, 0, 1]]
    C = companion_matrix([1, 1, 1])
    factors, F = frobenius_form_integer(C)
    assert factors == [[1, 1, 1]]
    assert F.tolist() == C


def test_frobenius_integer_reduces_mod_p():
    rng = random.Random(13)
    for _ in range(60):
        n = rng.randint(1, 5)
        A = rand_matrix(rng, n, n, lo=-4, hi=4)
        if rng.random() < 0.3:
            A = [[(2 if i == j else 0) for j in range(n)] for i in range(n)]
        factors, _ = frobenius_form_integer(A)
        g = [1]
        for f in factors:
            g = poly_mul(g, f)
        assert g == charpoly_integer(A)
        # entries are tiny, so these primes are good for every instance
        for p in (10007, 65537):
            assert invariant_factors_mod_p(A, p) == [[c % p for c in f] for f in factors]


def test_charpoly_minpoly_against_sympy():
    rng = random.Random(14)
    x = sympy.Symbol("x")
    for _ in range(100):
        n = rng.randint(1, 6)
        A = rand_matrix(rng, n, n)
        want = sympy.Matrix(A).charpoly(x).all_coeffs()[::-1]
        assert charpoly_integer(A) == [int(c) for c in want]
        mp = minpoly_integer(A)
        M = sympy.Matrix(A)
        acc = sympy.zeros(n)
        for i, c in enumerate(mp):
            acc += c * M**i
        assert acc == sympy.zeros(n)
