import random
from fractions import Fraction

import pytest

from certilin.arith import ceil_log2
from certilin.cert_field import (RankCertificate, RankProver, RankUpperProver, butterfly_subset_size,
                                 nonsingular_prove, nonsingular_verify, rank_prove, rank_upper_prove,
                                 rank_upper_verify, rank_verify, upper_bound_matrix, upper_pipeline)
from certilin.errors import ProtocolAbort, SubsetTooSmall
from certilin.linalg import (SparseMatrix, SubmatrixSelector, aslinearoperator, identity, mat_mul,
                             rank_mod_p)
from certilin.linalg.butterfly import ButterflyNetwork, butterfly_sample
from certilin.protocol import get_protocol, prove, replay_verify, run_interactive

P31 = 2**31 - 1


def low_rank(rng, m, n, r, p):
    if r == 0:
        return [[0] * n for _ in range(m)]
    L = [[rng.randrange(p) for _ in range(r)] for _ in range(m)]
    R = [[rng.randrange(p) for _ in range(n)] for _ in range(r)]
    return mat_mul(L, R, p)


def sparse_rank(rng, n, r, p, per_row=3):
    """n x n sparse matrix of rank r: r sparse rows, the rest zero or copies."""
    rows = {}
    for i in range(r):
        rows[i] = {j: rng.randrange(1, p) for j in rng.sample(range(n), per_row)}
        rows[i][i] = rng.randrange(1, p)
    entries = [(i, j, v) for i, row in rows.items() for j, v in row.items()]
    A = SparseMatrix(n, n, entries)
    if rank_mod_p(A.tolist(), p) != r:
        return sparse_rank(rng, n, r, p, per_row)
    return A


# --- non-singularity --------------------------------------------------------------


def test_nonsingular_prove_examples():
    assert nonsingular_prove(identity(3).tolist(), [3, 5, 2], 7) == [3, 5, 2]
    assert nonsingular_prove([[2, 1], [1, 1]], [1, 1], 7) == [0, 1]
    with pytest.raises(ProtocolAbort):
        nonsingular_prove([[1, 1], [1, 1]], [1, 0], 7)


def test_nonsingular_verify_examples():
    I2 = identity(2).tolist()
    assert nonsingular_verify(I2, [1, 2], [1, 2], p=5).accepted
    v = nonsingular_verify(I2, [1, 2], [1, 3], p=5)
    assert not v.accepted and v.failed_check == "Aw!=b"


def test_nonsingular_verify_cost():
    n = 50
    A = aslinearoperator(SparseMatrix(n, n, [(i, (i * 7) % n, i + 1) for i in range(n)]), modulus=101)
    b = [1] * n
    w = nonsingular_prove(A, b)
    v = nonsingular_verify(A, b, w)
    assert v.accepted
    assert v.cost.matvec_count == 1
    # one sparse product (2 ops per nonzero) plus the comparison
    assert v.cost.scalar_op_count == 2 * n + n
    assert v.cost.scalar_op_count <= 3 * n


def test_nonsingular_singular_abort_recorded_as_reject():
    A = aslinearoperator([[1, 1], [1, 1]], modulus=7)
    t, v = run_interactive(None, None, "nonsingular", A, 1, seed=3, params={"p": 7})
    # b lands in the column space only when b0 == b1
    b = [int(x) for x in t.rounds[0]["challenge"]["b"]["value"]]
    if b[0] != b[1]:
        assert t.aborted and not v.accepted and v.failed_check == "abort"


def test_nonsingular_subset_param():
    A = aslinearoperator(identity(4), modulus=101)
    for s in (2, 10, 101):
        t, v = run_interactive(None, None, "nonsingular", A, 2, seed=s, params={"p": 101, "subset_size": s})
        assert v.accepted and v.soundness_error_bound == Fraction(1, s) ** 2
        assert all(int(x) < s for x in t.rounds[0]["challenge"]["b"]["value"])
    with pytest.raises(SubsetTooSmall):
        run_interactive(None, None, "nonsingular", A, 1, seed=1, params={"p": 101, "subset_size": 102})


# --- rank upper bound -------------------------------------------------------------


def test_rank_upper_zero_matrix():
    A = [[0] * 3 for _ in range(3)]
    rng = random.Random(0)
    U, V = butterfly_sample(3, 101, rng), butterfly_sample(3, 101, rng)
    w = rank_upper_prove(A, 0, U, V, 101)
    assert w == [1]
    assert upper_bound_matrix(A, 0, U, V, 101) == [[0]]
    assert rank_upper_verify(A, 0, U, V, w, 101).accepted


def test_rank_upper_identity_networks():
    A = [[1, 2], [2, 4]]
    ident = ButterflyNetwork(2, ())
    assert rank_upper_prove(A, 1, ident, ident, 7) == [1, 3]


def test_rank_upper_zero_w_rejected():
    A = [[0] * 3 for _ in range(3)]
    rng = random.Random(0)
    U, V = butterfly_sample(3, 101, rng), butterfly_sample(3, 101, rng)
    v = rank_upper_verify(A, 0, U, V, [0], 101)
    assert not v.accepted and v.failed_check == "w=0"


def test_rank_upper_false_claim_aborts_often():
    # I_2 has rank 2 > 1; M is the whole preconditioned matrix, singular only by accident
    p = 101
    rng = random.Random(1)
    aborts = 0
    for _ in range(300):
        U, V = butterfly_sample(2, p, rng), butterfly_sample(2, p, rng)
        try:
            rank_upper_prove(identity(2).tolist(), 1, U, V, p)
        except ProtocolAbort:
            aborts += 1
    assert aborts / 300 >= 0.5


def _false_claim_abort_rate(A, r, p, rng, trials):
    m, n = len(A), len(A[0])
    aborts = 0
    for _ in range(trials):
        U, V = butterfly_sample(m, p, rng), butterfly_sample(n, p, rng)
        try:
            rank_upper_prove(A, r, U, V, p)
        except ProtocolAbort:
            aborts += 1
    return aborts / trials


def test_rank_upper_kernel_through_first_column():
    # rank 2, kernel (1, -2, 1); claiming rank <= 1 must fail for most networks
    S = [[1, 2, 3], [2, 4, 6], [1, 1, 1]]
    assert _false_claim_abort_rate(S, 1, 10007, random.Random(4), 400) >= 0.9


@pytest.mark.parametrize("n", range(2, 13))
def test_rank_upper_false_claim_adversarial_supports(n):
    # rank r + 1 matrices whose row space or column space sits on a few coordinates
    p = 10007
    rng = random.Random(100 + n)
    for r in range(0, n - 1):
        support = sorted(rng.sample(range(n), r + 1))
        D = [[0] * n for _ in range(n)]
        for k, i in enumerate(support):
            D[i][support[(k + 1) % (r + 1)]] = 1
        for A in (D, [list(c) for c in zip(*D)]):
            assert _false_claim_abort_rate(A, r, p, rng, 40) >= 0.5, (n, r, support)


def test_rank_upper_verifier_cost():
    rng = random.Random(2)
    p = P31
    for m, n in [(8, 8), (13, 7), (32, 20)]:
        r = min(m, n) - 2
        A = aslinearoperator(low_rank(rng, m, n, r, p), modulus=p)
        U, V = butterfly_sample(m, p, rng), butterfly_sample(n, p, rng)
        w = rank_upper_prove(A, r, U, V)
        v = rank_upper_verify(A, r, U, V, w)
        assert v.accepted and v.cost.matvec_count == 1
        omega = A.cost
        budget = 3 * m * ceil_log2(m) / 2 + 3 * n * ceil_log2(n) / 2 + omega + 2 * (m + n)
        assert v.cost.scalar_op_count <= budget


def test_rank_upper_needs_large_subset():
    with pytest.raises(SubsetTooSmall):
        prove(RankUpperProver(), "rank-upper", aslinearoperator(identity(4), modulus=5), 1, params={"p": 5})


def test_upper_pipeline_is_linear():
    rng = random.Random(3)
    p = 10007
    A = aslinearoperator(low_rank(rng, 9, 6, 3, p), modulus=p)
    U, V = butterfly_sample(9, p, rng), butterfly_sample(6, p, rng)
    for _ in range(20):
        w1 = [rng.randrange(p) for _ in range(4)]
        w2 = [rng.randrange(p) for _ in range(4)]
        s = [(a + b) % p for a, b in zip(w1, w2)]
        z1, z2 = upper_pipeline(A, 3, U, V, w1, p), upper_pipeline(A, 3, U, V, w2, p)
        assert upper_pipeline(A, 3, U, V, s, p) == [(a + b) % p for a, b in zip(z1, z2)]


# --- rank -------------------------------------------------------------------------


def test_rank_full_rank_shortcut():
    cert = rank_prove(identity(3).tolist(), 5)
    assert cert.r == 3 and not cert.has_upper and cert.upper_transcript == []
    v = rank_verify(identity(3).tolist(), cert, 5)
    assert v.accepted and v.cost.matvec_count == 1


def test_rank_rank_one_example():
    # |S| = 9 here, so Z_11 is the smallest field that carries the upper part
    cert = rank_prove([[1, 2], [2, 4]], 11)
    assert cert.r == 1
    assert (cert.selector.row_indices, cert.selector.col_indices) == ((0,), (0,))
    assert cert.has_upper and len(cert.lower_transcript) == 1
    v = rank_verify([[1, 2], [2, 4]], cert, 11)
    assert v.accepted and v.cost.matvec_count == 2


def test_rank_refuses_small_field_when_upper_part_needed():
    with pytest.raises(SubsetTooSmall):
        rank_prove([[1, 2], [2, 4]], 7)


def test_rank_zero_matrix():
    Z = [[0] * 3 for _ in range(3)]
    cert = rank_prove(Z, 101)
    assert cert.r == 0 and cert.has_upper
    assert cert.lower_transcript[0]["w"] == []
    assert [len(u["w"]) for u in cert.upper_transcript] == [1]
    v = rank_verify(Z, cert, 101)
    assert v.accepted and v.cost.matvec_count == 1


def test_rank_sparse_20x20_rank_7():
    rng = random.Random(4)
    A = aslinearoperator(sparse_rank(rng, 20, 7, P31), modulus=P31)
    cert = rank_prove(A)
    assert cert.r == 7
    v = rank_verify(A, cert)
    assert v.accepted and v.cost.matvec_count == 2


def test_rank_rectangular_full_rank():
    rng = random.Random(5)
    A = low_rank(rng, 4, 9, 4, P31)
    cert = rank_prove(A, P31)
    assert cert.r == 4 and not cert.has_upper
    assert rank_verify(A, cert, P31).cost.matvec_count == 1


def test_rank_completeness_random():
    rng = random.Random(6)
    ok = 0
    for t in range(1000):
        if t % 2:
            p = P31
            m, n = rng.randint(1, 30), rng.randint(1, 30)
        else:
            p = 101
            m, n = rng.randint(1, 6), rng.randint(1, 6)
        r = rng.randint(0, min(m, n))
        rows = low_rank(rng, m, n, r, p)
        A = aslinearoperator(rows, modulus=p)
        cert = rank_prove(A, k=1, mode="interactive", seed=t)
        assert cert.r == rank_mod_p(rows, p)
        v = rank_verify(A, cert, verifier_rng=random.Random(t))
        assert v.accepted
        assert v.cost.matvec_count == (1 if cert.r in (0, min(m, n)) else 2)
        ok += 1
    assert ok == 1000


def test_rank_claim_one_too_high_rejected():
    rng = random.Random(7)
    p = 101
    rows = low_rank(rng, 5, 5, 2, p)
    A = aslinearoperator(rows, modulus=p)

    class High(RankProver):
        # claims rank 3 with a singular 3 x 3 selection
        def start(self, ctx):
            self.rows = [list(r) for r in rows]
            self.claim = (3, SubmatrixSelector((0, 1, 2), (0, 1, 2)))

    accepted = 0
    for s in range(300):
        t = prove(High(), "rank", A, 1, mode="interactive", seed=s, params={"p": p})
        accepted += replay_verify(t, A).accepted
    sigma = (1 / p * (1 - 1 / p) / 300) ** 0.5
    assert accepted / 300 <= 1 / p + 3 * sigma


def test_rank_claim_one_too_low_rejected():
    rng = random.Random(8)
    p = 10007
    rows = low_rank(rng, 5, 5, 3, p)
    A = aslinearoperator(rows, modulus=p)
    accepted = 0
    for s in range(300):
        t = prove(RankProver(r=2), "rank", A, 1, mode="interactive", seed=s, params={"p": p})
        accepted += replay_verify(t, A).accepted
    # rejection rate at least 1/2
    assert accepted / 300 <= 0.5


def test_rank_claims_must_agree_across_rounds():
    A = aslinearoperator(identity(3), modulus=101)
    t = prove(RankProver(), "rank", A, 2, params={"p": 101})
    assert replay_verify(t, A).accepted
    assert isinstance(rank_prove(A, k=2), RankCertificate)


def test_rank_upper_protocol_session():
    rng = random.Random(9)
    p = P31
    A = aslinearoperator(low_rank(rng, 10, 12, 4, p), modulus=p)
    t, v = run_interactive(None, None, "rank-upper", A, 3, seed=1, params={"p": p})
    assert v.accepted and v.soundness_error_bound == Fraction(1, 8)
    assert v.cost.matvec_count == 3
    assert get_protocol("rank-upper").derived_params(get_protocol("rank-upper").prepare(A, {"p": p})) == \
        {"subset_size": butterfly_subset_size(10, 12)}
