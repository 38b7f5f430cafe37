"""Blackbox certificates over Z_p: non-singularity, rank upper bound, rank.

The verifier touches A only through ``matvec``.  Non-singularity uses one
product (A w = b for a random b); the rank upper bound r uses one product
through two random butterflies, M = [I | 0] U A V [I ; 0] with a non-zero
kernel vector w of M.  The rank certificate combines both: a non-singular
r x r submatrix for rank >= r, and the upper bound for rank <= r.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .arith import ceil_log2, is_probable_prime
from .errors import (DimensionMismatch, InconsistentSystem, MatrixNonsingular, ProtocolAbort,
                     SchemaViolation, SubsetTooSmall)
from .linalg.butterfly import (ButterflyNetwork, butterfly_apply, butterfly_apply_block, butterfly_sample,
                               butterfly_transpose_apply, butterfly_transpose_apply_block)
from .linalg.elimination import matmul_mod, nullspace_vector, rank_profile_mod_p, solve_mod_p, to_array
from .linalg.matrices import LinearOperator, SubmatrixSelector, aslinearoperator, submatrix_operator
from .protocol import (Context, Meter, Protocol, Verdict, prove, register, replay_verify, wire_dict,
                       wire_int, wire_list, wire_vector)


def butterfly_subset_size(m: int, n: int) -> int:
    """|S| = s + 1 for S = {0, ..., s}, s = 2 min(m, n)(ceil log m + ceil log n)."""
    return max(2, 2 * min(m, n) * (ceil_log2(m) + ceil_log2(n)) + 1)


def _field_operator(inp, p: int) -> LinearOperator:
    if isinstance(inp, LinearOperator):
        if inp.modulus != p:
            raise DimensionMismatch(f"operator is over {inp.modulus}, expected Z_{p}")
        return inp
    return aslinearoperator(inp, modulus=p)


def _field_prime(params) -> int:
    p = params.get("p")
    if p is None:
        raise SchemaViolation("field protocols need the prime p")
    p = int(p)
    if p < 2 or not is_probable_prime(p):
        raise SchemaViolation(f"{p} is not prime")
    return p


def _dense_mod(A: LinearOperator):
    """Prover-side densification (uncounted)."""
    return A.todense().tolist()


def upper_bound_matrix(A_rows, r: int, U: ButterflyNetwork, V: ButterflyNetwork, p: int) -> list:
    """[I_{r+1} | 0] U A V^T [I_{r+1} ; 0] mod p, built from dense A.

    V acts on columns through its transpose: the leading columns of V itself
    do not depend on the switch parameters.
    """
    n = V.dimension
    X = np.zeros((n, r + 1), dtype=object if p >= 1 << 31 else np.int64)
    for j in range(r + 1):
        X[j, j] = 1
    X = butterfly_transpose_apply_block(V, X, p)
    AX = matmul_mod(to_array(A_rows, p), X, p)
    Y = butterfly_apply_block(U, AX, p)
    return [[int(x) for x in row] for row in Y[: r + 1]]


def upper_pipeline(A: LinearOperator, r: int, U, V, w, p: int, meter=None) -> list:
    """pad w -> V^T -> A (one matvec) -> U -> first r+1 entries."""
    n = A.shape[1]
    x = list(w) + [0] * (n - len(w))
    x = butterfly_transpose_apply(V, x, p, meter)
    y = A.matvec(x)
    z = butterfly_apply(U, y, p, meter)
    if meter is not None:
        meter.scalar += n + r + 1
    return z[: r + 1]


# --- non-singularity ------------------------------------------------------------


class NonsingularProtocol(Protocol):
    id = "nonsingular"
    steps = (("commitment", "claim"), ("challenge", "b"), ("response", "w"))
    user_params = ("p", "subset_size")

    def prepare(self, inp, params):
        p = _field_prime(params)
        A = _field_operator(inp, p)
        n, n2 = A.shape
        if n != n2:
            raise DimensionMismatch("non-singularity needs a square matrix")
        s = int(params.get("subset_size") or p)
        if not 2 <= s <= p:
            raise SubsetTooSmall(f"subset size {s} must lie in [2, p]")
        return Context(A=A, p=p, n=n, subset=s)

    def encode_input(self, ctx):
        return b"nonsingular|p=%d|S=%d|" % (ctx.p, ctx.subset) + ctx.A.encoding()

    def operators(self, ctx):
        return [ctx.A]

    def draw(self, label, stream, ctx, state):
        b = [stream.randbelow(ctx.subset) for _ in range(ctx.n)]
        return b, b

    def parse(self, label, payload, ctx, state):
        if label == "claim":
            if payload != "nonsingular":
                raise SchemaViolation("claim must be 'nonsingular'")
            return payload
        return wire_vector(payload, ctx.n, ctx.p, "w")

    def check(self, ctx, state, meter, vrng):
        return nonsingular_check(ctx.A, state["b"], state["w"], meter)

    def round_bound(self, ctx, state):
        return Fraction(1, ctx.subset)

    def honest_prover(self):
        return NonsingularProver()


def nonsingular_check(A, b, w, meter=None) -> Optional[str]:
    y = A.matvec(list(w))
    if meter is not None:
        meter.scalar += len(b)
    return None if list(y) == [x % A.modulus for x in b] else "Aw!=b"


class NonsingularProver:
    def start(self, ctx):
        self.rows = _dense_mod(ctx.A)

    def respond(self, label, ctx, state):
        if label == "claim":
            return "nonsingular"
        return nonsingular_prove(self.rows, state["b"], ctx.p)


def nonsingular_prove(A, b, p: Optional[int] = None) -> list:
    """w = A^{-1} b; ProtocolAbort when the system is inconsistent."""
    if isinstance(A, LinearOperator):
        p = A.modulus if p is None else p
        A = _dense_mod(A)
    try:
        return solve_mod_p(A, b, p)
    except InconsistentSystem as exc:
        raise ProtocolAbort("A w = b has no solution; A is singular") from exc


def nonsingular_verify(A, b, w, p: Optional[int] = None, subset_size: Optional[int] = None) -> Verdict:
    """One non-singularity round on an explicit (b, w) pair."""
    op = A if isinstance(A, LinearOperator) else aslinearoperator(A, modulus=p)
    p = op.modulus
    meter = Meter([op])
    if len(w) != op.shape[1]:
        return Verdict(False, "schema", Fraction(1), meter.report())
    failed = nonsingular_check(op, b, [x % p for x in w], meter)
    bound = Fraction(1, subset_size or p)
    return Verdict(failed is None, failed, bound, meter.report())


# --- rank upper bound ------------------------------------------------------------


class RankUpperProtocol(Protocol):
    id = "rank-upper"
    steps = (("commitment", "r"), ("challenge", "UV"), ("response", "w"))
    claim_labels = ("r",)
    user_params = ("p",)

    def prepare(self, inp, params):
        p = _field_prime(params)
        A = _field_operator(inp, p)
        m, n = A.shape
        s = butterfly_subset_size(m, n)
        if p < s:
            raise SubsetTooSmall(f"Z_{p} is smaller than the required subset of size {s}")
        return Context(A=A, p=p, m=m, n=n, subset=s)

    def encode_input(self, ctx):
        return b"rank-upper|p=%d|" % ctx.p + ctx.A.encoding()

    def operators(self, ctx):
        return [ctx.A]

    def derived_params(self, ctx):
        return {"subset_size": ctx.subset}

    def draw(self, label, stream, ctx, state):
        U = butterfly_sample(ctx.m, ctx.subset, stream)
        V = butterfly_sample(ctx.n, ctx.subset, stream)
        return (U, V), {"U": U.to_payload(), "V": V.to_payload()}

    def parse(self, label, payload, ctx, state):
        if label == "r":
            return wire_int(payload, 0, min(ctx.m, ctx.n) + 1, "r")
        if state["r"] == min(ctx.m, ctx.n):
            # rank <= min(m, n) holds for every matrix; nothing to certify
            return wire_vector(payload, 0, ctx.p, "w")
        return wire_vector(payload, state["r"] + 1, ctx.p, "w")

    def check(self, ctx, state, meter, vrng):
        if state["r"] == min(ctx.m, ctx.n):
            return None
        U, V = state["UV"]
        return rank_upper_check(ctx.A, state["r"], U, V, state["w"], ctx.p, meter)

    def round_bound(self, ctx, state):
        return Fraction(0) if state.get("r") == min(ctx.m, ctx.n) else Fraction(1, 2)

    def honest_prover(self):
        return RankUpperProver()


def rank_upper_check(A, r, U, V, w, p, meter=None) -> Optional[str]:
    if not any(w):
        return "w=0"
    z = upper_pipeline(A, r, U, V, w, p, meter)
    return None if not any(z) else "Mw!=0"


def rank_upper_prove(A, r: int, U: ButterflyNetwork, V: ButterflyNetwork, p: Optional[int] = None) -> list:
    """Non-zero kernel vector of M; ProtocolAbort when M is non-singular."""
    if isinstance(A, LinearOperator):
        p = A.modulus if p is None else p
        A = _dense_mod(A)
    M = upper_bound_matrix(A, r, U, V, p)
    try:
        return nullspace_vector(M, p)
    except MatrixNonsingular as exc:
        raise ProtocolAbort(f"the leading {r + 1}x{r + 1} block is non-singular") from exc


def rank_upper_verify(A, r, U, V, w, p: Optional[int] = None) -> Verdict:
    op = A if isinstance(A, LinearOperator) else aslinearoperator(A, modulus=p)
    p = op.modulus
    m, n = op.shape
    if p < butterfly_subset_size(m, n):
        raise SubsetTooSmall(f"Z_{p} is too small for the butterfly subset")
    meter = Meter([op])
    if not 0 <= r < min(m, n) or len(w) != r + 1:
        return Verdict(False, "schema", Fraction(1), meter.report())
    failed = rank_upper_check(op, r, U, V, w, p, meter)
    return Verdict(failed is None, failed, Fraction(1, 2), meter.report())


class RankUpperProver:
    def __init__(self, r: Optional[int] = None):
        self.r = r

    def start(self, ctx):
        self.rows = _dense_mod(ctx.A)
        if self.r is None:
            self.r = rank_profile_mod_p(self.rows, ctx.p)[0]

    def respond(self, label, ctx, state):
        if label == "r":
            return self.r
        if state["r"] == min(ctx.m, ctx.n):
            return []
        U, V = state["UV"]
        return rank_upper_prove(self.rows, state["r"], U, V, ctx.p)


# --- rank -----------------------------------------------------------------------------


def _parse_claim(payload, m, n) -> tuple:
    d = wire_dict(payload, ("r", "rows", "cols"), "rank claim")
    r = wire_int(d["r"], 0, min(m, n) + 1, "r")
    rows = [wire_int(x, 0, m, "row index") for x in wire_list(d["rows"], r, "rows")]
    cols = [wire_int(x, 0, n, "column index") for x in wire_list(d["cols"], r, "cols")]
    try:
        sel = SubmatrixSelector(rows, cols)
    except ValueError as exc:
        raise SchemaViolation(str(exc)) from exc
    return r, sel


def _draw_rank_challenge(stream, r, m, n, p, subset):
    b = [stream.randbelow(p) for _ in range(r)]
    wire = {"b": b}
    U = V = None
    if r < min(m, n):
        U = butterfly_sample(m, subset, stream)
        V = butterfly_sample(n, subset, stream)
        wire.update(U=U.to_payload(), V=V.to_payload())
    return (b, U, V), wire


def _parse_rank_response(payload, r, full, p) -> tuple:
    keys = ("w_lower",) if full else ("w_lower", "w_upper")
    d = wire_dict(payload, keys, "rank response")
    lower = wire_vector(d["w_lower"], r, p, "w_lower")
    upper = None if full else wire_vector(d["w_upper"], r + 1, p, "w_upper")
    return lower, upper


def rank_check(A, r, sel, challenge, response, p, meter=None) -> Optional[str]:
    b, U, V = challenge
    lower, upper = response
    if r > 0:
        sub = submatrix_operator(A, sel)
        y = sub.matvec(lower)
        if meter is not None:
            meter.scalar += r
        if list(y) != list(b):
            return "lower:Aw!=b"
    if U is not None:
        failed = rank_upper_check(A, r, U, V, upper, p, meter)
        if failed is not None:
            return "upper:" + failed
    return None


def _rank_round_bound(r, m, n, p) -> Fraction:
    if r < min(m, n):
        return max(Fraction(1, 2), Fraction(1, p))
    return Fraction(1, p)


class RankProtocol(Protocol):
    """Combined rank certificate over Z_p.

    One round: commitment (r, rows, cols); challenge (b, U, V); response
    (w_lower, w_upper).  The lower part is absent for r = 0 and the upper
    part for r = min(m, n).
    """

    id = "rank"
    steps = (("commitment", "claim"), ("challenge", "challenge"), ("response", "response"))
    claim_labels = ("claim",)
    user_params = ("p",)

    def prepare(self, inp, params):
        # |S| <= p only matters once the claim needs the butterflies
        p = _field_prime(params)
        A = _field_operator(inp, p)
        m, n = A.shape
        return Context(A=A, p=p, m=m, n=n, subset=butterfly_subset_size(m, n))

    def encode_input(self, ctx):
        return b"rank|p=%d|" % ctx.p + ctx.A.encoding()

    def operators(self, ctx):
        return [ctx.A]

    def derived_params(self, ctx):
        return {"subset_size": ctx.subset}

    def draw(self, label, stream, ctx, state):
        r, _ = state["claim"]
        return _draw_rank_challenge(stream, r, ctx.m, ctx.n, ctx.p, ctx.subset)

    def parse(self, label, payload, ctx, state):
        if label == "claim":
            claim = _parse_claim(payload, ctx.m, ctx.n)
            if claim[0] < min(ctx.m, ctx.n) and ctx.p < ctx.subset:
                raise SubsetTooSmall(f"Z_{ctx.p} is smaller than the required subset of size {ctx.subset}")
            return claim
        r, _ = state["claim"]
        return _parse_rank_response(payload, r, r == min(ctx.m, ctx.n), ctx.p)

    def check(self, ctx, state, meter, vrng):
        r, sel = state["claim"]
        return rank_check(ctx.A, r, sel, state["challenge"], state["response"], ctx.p, meter)

    def round_bound(self, ctx, state):
        return _rank_round_bound(state["claim"][0], ctx.m, ctx.n, ctx.p)

    def honest_prover(self):
        return RankProver()


def rank_claim(rows, p: int, r: Optional[int] = None) -> tuple:
    """(r, selector) from rank-revealing elimination."""
    rank, pivots = rank_profile_mod_p(rows, p)
    if r is None:
        r = rank
    chosen = pivots[:r]
    return r, SubmatrixSelector(sorted(i for i, _ in chosen), sorted(j for _, j in chosen))


def rank_response(rows, r, sel, challenge, p) -> dict:
    b, U, V = challenge
    out = {"w_lower": []}
    if r > 0:
        sub = [[rows[i][j] for j in sel.col_indices] for i in sel.row_indices]
        out["w_lower"] = nonsingular_prove(sub, b, p)
    if U is not None:
        out["w_upper"] = rank_upper_prove(rows, r, U, V, p)
    return out


class RankProver:
    def __init__(self, r: Optional[int] = None):
        self.r = r

    def start(self, ctx):
        self.rows = _dense_mod(ctx.A)
        self.claim = rank_claim(self.rows, ctx.p, self.r)

    def respond(self, label, ctx, state):
        r, sel = self.claim
        if label == "claim":
            return {"r": r, "rows": list(sel.row_indices), "cols": list(sel.col_indices)}
        return rank_response(self.rows, r, sel, state["challenge"], ctx.p)


@dataclass(frozen=True)
class RankCertificate:
    """View of a rank transcript as the pair (lower bound, upper bound)."""

    r: int
    selector: SubmatrixSelector
    transcript: object

    @property
    def has_upper(self) -> bool:
        return all("U" in rec["challenge"]["challenge"]["value"] for rec in self.transcript.rounds)

    @property
    def lower_transcript(self) -> list:
        return [{"b": rec["challenge"]["challenge"]["value"]["b"], "w": rec["response"]["response"]["w_lower"]}
                for rec in self.transcript.rounds]

    @property
    def upper_transcript(self) -> list:
        if not self.has_upper:
            return []
        return [{"U": rec["challenge"]["challenge"]["value"]["U"], "V": rec["challenge"]["challenge"]["value"]["V"],
                 "w": rec["response"]["response"]["w_upper"]} for rec in self.transcript.rounds]


def rank_prove(A, p: Optional[int] = None, k: int = 1, *, mode: str = "fs", seed=None,
               prover=None) -> RankCertificate:
    op = A if isinstance(A, LinearOperator) else aslinearoperator(A, modulus=p)
    p = op.modulus
    transcript = prove(prover or RankProver(), "rank", op, k, mode=mode, seed=seed, params={"p": p})
    if transcript.aborted:
        raise ProtocolAbort(transcript.aborted)
    claim = transcript.rounds[0]["commitment"]["claim"]
    sel = SubmatrixSelector([int(x) for x in claim["rows"]], [int(x) for x in claim["cols"]])
    return RankCertificate(int(claim["r"]), sel, transcript)


def rank_verify(A, cert, p: Optional[int] = None, verifier_rng=None) -> Verdict:
    op = A if isinstance(A, LinearOperator) else aslinearoperator(A, modulus=p)
    transcript = cert.transcript if isinstance(cert, RankCertificate) else cert
    return replay_verify(transcript, op, params={"p": op.modulus}, verifier_rng=verifier_rng)


PROTOCOLS = {
    "nonsingular": register(NonsingularProtocol()),
    "rank-upper": register(RankUpperProtocol()),
    "rank": register(RankProtocol()),
}
