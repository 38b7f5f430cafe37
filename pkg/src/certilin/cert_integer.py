"""Certificates over Z: rank, determinant, characteristic polynomial,
Frobenius form (hence minimal polynomial) and signature.

All of them follow the same residue pattern: the prover commits to an
integer object, the verifier picks a random prime p, and the prover
answers with a factorization modulo p that the verifier checks with
Freivalds products.  A prime that breaks the honest factorization (rank
drop, degenerate invariant factors) may be declared unlucky; the verifier
then redraws, at most three times per round.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .arith import (ceil_log2, eval_bit_bound, eval_equals_integer, hadamard_invariant_bound,
                    poly_divmod_monic, poly_eval, poly_mul, prime_window_bound, primes_in_window,
                    sample_prime_set)
from .cert_field import (_draw_rank_challenge, _parse_claim, _parse_rank_response, butterfly_subset_size,
                         rank_check, rank_claim, rank_response)
from .errors import (DimensionMismatch, NotSymmetric, SchemaViolation, TranscriptNotAccepted,
                     ZeroMatrixError)
from .linalg.elimination import _plu, integer_determinant, integer_rank, integer_rank_multimodular, permutation_sign
from .linalg.frobenius import frobenius_form_integer, frobenius_form_mod_p
from .linalg.matrices import (DenseMatrix, LinearOperator, as_dense, aslinearoperator, block_companion,
                              encode_matrix, mat_vec, reduced_operator)
from .protocol import (UNLUCKY, Context, Protocol, Verdict, prove, register, replay_verify, wire_dict,
                       wire_int, wire_list, wire_matrix)

DEFAULT_C = 3
DEFAULT_FREIVALDS_BITS = 40
PRIME_FLOOR = 1 << 15  # residue-certificate primes are drawn above this


def freivalds_reps(p: int, bits: int) -> int:
    """ceil(bits / log2 p) random vectors give error <= 2**-bits."""
    return max(1, -(-bits // max(1, p.bit_length() - 1)))


@functools.lru_cache(maxsize=64)
def prime_window(count: int) -> tuple:
    """The primes of (2**15, W] for the least doubled W holding `count` of them."""
    bound = prime_window_bound(count, PRIME_FLOOR + 16 * count, PRIME_FLOOR)
    return primes_in_window(PRIME_FLOOR, bound)


def _bad_prime_fraction(bits: int, window) -> Fraction:
    """Primes above 2**15 dividing a non-zero integer of `bits` bits, over the window size."""
    return Fraction(max(1, -(-bits // 15)), len(window))


def _int_params(params) -> tuple:
    c = int(params.get("c") or DEFAULT_C)
    fb = int(params.get("freivalds_bits") or DEFAULT_FREIVALDS_BITS)
    if c < 3:
        raise SchemaViolation("c must be at least 3")
    if fb < 1:
        raise SchemaViolation("freivalds_bits must be positive")
    return c, fb


def _square_dense(inp) -> DenseMatrix:
    if isinstance(inp, LinearOperator):
        if inp.modulus is not None:
            raise DimensionMismatch("integer certificates need a matrix over Z")
        D = inp.todense()
    else:
        D = as_dense(inp)
    if D.modulus is not None:
        D = DenseMatrix(D.rows)
    m, n = D.shape
    if m != n:
        raise DimensionMismatch("this certificate needs a square matrix")
    return D


# --- residue determinant check ------------------------------------------------------


def _parse_perm(x, n) -> list:
    perm = [wire_int(v, 0, n, "perm") for v in wire_list(x, n, "perm")]
    if sorted(perm) != list(range(n)):
        raise SchemaViolation("perm is not a permutation")
    return perm


def _parse_plu(payload, n, p) -> tuple:
    d = wire_dict(payload, ("perm", "L", "U"), "plu")
    return _parse_perm(d["perm"], n), wire_matrix(d["L"], n, n, p, "L"), wire_matrix(d["U"], n, n, p, "U")


def plu_payload(rows, p: int) -> dict:
    perm, L, U = _plu(rows, p)
    return {"perm": perm, "L": L, "U": U}


def det_check(B_rows, delta: int, H: int, p: int, plu, reps: int, vrng, meter=None) -> Optional[str]:
    """|delta| <= H, P L U = B mod p (Freivalds) and sign(P) prod U_ii = delta mod p."""
    if abs(delta) > H:
        return "det-bound"
    perm, L, U = plu
    n = len(B_rows)
    for i in range(n):
        if L[i][i] != 1 or any(L[i][j] for j in range(i + 1, n)) or any(U[i][j] for j in range(i)):
            return "plu-shape"
    Bp = [[x % p for x in r] for r in B_rows]
    for _ in range(reps):
        v = [vrng.randrange(p) for _ in range(n)]
        y = mat_vec(L, mat_vec(U, v, p), p)
        z = [0] * n
        for k in range(n):
            z[perm[k]] = y[k]
        if z != mat_vec(Bp, v, p):
            return "freivalds"
    d = permutation_sign(perm) % p
    for k in range(n):
        d = d * U[k][k] % p
    if meter is not None:
        meter.residue += n * n + reps * 3 * n * n + n
    return None if d == delta % p else "diagonal"


def _draw_prime(stream, window):
    q = window[stream.randbelow(len(window))]
    return q, q


class DeterminantProtocol(Protocol):
    id = "det"
    steps = (("commitment", "delta"), ("challenge", "prime"), ("response", "plu"))
    redrawable = frozenset({"prime"})
    claim_labels = ("delta",)
    user_params = ("c", "freivalds_bits")

    def prepare(self, inp, params):
        B = _square_dense(inp)
        c, fb = _int_params(params)
        n = B.shape[0]
        norm = B.norm_inf()
        H = hadamard_invariant_bound(n, n, norm) if norm else 0
        bits = max(1, (2 * H).bit_length())
        window = prime_window(c * bits)
        return Context(B=B, n=n, H=H, bits=bits, c=c, fb=fb, window=window)

    def encode_input(self, ctx):
        return b"det|c=%d|fb=%d|" % (ctx.c, ctx.fb) + encode_matrix(ctx.B)

    def derived_params(self, ctx):
        return {"hadamard": ctx.H, "prime_count": len(ctx.window), "prime_max": ctx.window[-1]}

    def draw(self, label, stream, ctx, state):
        return _draw_prime(stream, ctx.window)

    def parse(self, label, payload, ctx, state):
        if label == "delta":
            return wire_int(payload, what="delta")
        return _parse_plu(payload, ctx.n, state["prime"])

    def check(self, ctx, state, meter, vrng):
        p = state["prime"]
        failed = det_check(ctx.B.rows, state["delta"], ctx.H, p, state["plu"],
                           freivalds_reps(p, ctx.fb), vrng, meter)
        return None if failed is None else "det:" + failed

    def round_bound(self, ctx, state):
        return _bad_prime_fraction(ctx.bits, ctx.window) + Fraction(1, 1 << ctx.fb)

    def honest_prover(self):
        return DeterminantProver()


class DeterminantProver:
    def start(self, ctx):
        self.delta = integer_determinant(ctx.B)

    def respond(self, label, ctx, state):
        if label == "delta":
            return self.delta
        return plu_payload(ctx.B.rows, state["prime"])


# --- characteristic polynomial ------------------------------------------------------


def _shifted(A: DenseMatrix, lam: int) -> list:
    n = A.shape[0]
    return [[(lam if i == j else 0) - A.rows[i][j] for j in range(n)] for i in range(n)]


class CharpolyProtocol(Protocol):
    """g, then lambda in {0..cn-1}, then delta = det(lambda I - A) with its residue certificate."""

    id = "charpoly"
    steps = (("commitment", "g"), ("challenge", "lambda"), ("response", "delta"),
             ("challenge", "prime"), ("response", "plu"))
    redrawable = frozenset({"prime"})
    claim_labels = ("g",)
    user_params = ("c", "freivalds_bits")

    def prepare(self, inp, params):
        A = _square_dense(inp)
        c, fb = _int_params(params)
        n = A.shape[0]
        norm_max = A.norm_inf() + c * n
        bits = (2 * hadamard_invariant_bound(n, n, norm_max)).bit_length()
        return Context(A=A, n=n, c=c, fb=fb, bits=bits, window=prime_window(c * bits))

    def encode_input(self, ctx):
        return b"%s|c=%d|fb=%d|" % (self.id.encode(), ctx.c, ctx.fb) + encode_matrix(ctx.A)

    def derived_params(self, ctx):
        return {"lambda_range": ctx.c * ctx.n, "prime_count": len(ctx.window), "prime_max": ctx.window[-1]}

    def draw(self, label, stream, ctx, state):
        if label == "lambda":
            lam = stream.randbelow(ctx.c * ctx.n)
            return lam, lam
        return _draw_prime(stream, ctx.window)

    def parse(self, label, payload, ctx, state):
        if label == "g":
            return [wire_int(x, what="g") for x in wire_list(payload, what="g")]
        if label == "delta":
            return wire_int(payload, what="delta")
        return _parse_plu(payload, ctx.n, state["prime"])

    def check(self, ctx, state, meter, vrng):
        g, lam, delta, p = state["g"], state["lambda"], state["delta"], state["prime"]
        if len(g) != ctx.n + 1 or g[-1] != 1:
            return "degree"
        B = _shifted(ctx.A, lam)
        norm = max((abs(x) for r in B for x in r), default=0)
        H = hadamard_invariant_bound(ctx.n, ctx.n, norm) if norm else 0
        if abs(delta) > H:
            return "det:det-bound"
        bits = max(eval_bit_bound(g, lam), H.bit_length()) + 1
        if not eval_equals_integer(g, lam, delta, bits):
            return "eval"
        meter.residue += (ctx.n + 1) * ((bits + 2) // 60 + 1)
        failed = det_check(B, delta, H, p, state["plu"], freivalds_reps(p, ctx.fb), vrng, meter)
        return None if failed is None else "det:" + failed

    def round_bound(self, ctx, state):
        return Fraction(1, ctx.c) + _bad_prime_fraction(ctx.bits, ctx.window) + Fraction(1, 1 << ctx.fb)

    def honest_prover(self):
        return CharpolyProver()


class CharpolyProver:
    def __init__(self, g=None):
        self.g = g

    def start(self, ctx):
        if self.g is None:
            factors, _ = frobenius_form_integer(ctx.A)
            g = [1]
            for f in factors:
                g = poly_mul(g, f)
            self.g = g

    def respond(self, label, ctx, state):
        if label == "g":
            return self.g
        if label == "delta":
            return poly_eval(self.g, state["lambda"])
        return plu_payload(_shifted(ctx.A, state["lambda"]), state["prime"])


class PSDProtocol(CharpolyProtocol):
    """Characteristic polynomial certificate on a symmetric input."""

    id = "psd"

    def prepare(self, inp, params):
        ctx = super().prepare(inp, params)
        if not ctx.A.is_symmetric():
            raise NotSymmetric("signature certificates need a symmetric matrix")
        return ctx


# --- Frobenius form ----------------------------------------------------------------------


def _coefficient_bits(factors) -> int:
    return max((abs(c).bit_length() for f in factors for c in f), default=0)


def frobenius_prime_count(n: int, norm: int, factors, c: int) -> int:
    """c * 2n(ceil log2 n + b), b the largest entry or coefficient bit size plus one."""
    b = max(norm.bit_length(), _coefficient_bits(factors)) + 1
    return c * 2 * n * (ceil_log2(n) + b)


class FrobeniusProtocol(Protocol):
    id = "frobenius"
    steps = (("commitment", "factors"), ("challenge", "prime"), ("response", "form"))
    redrawable = frozenset({"prime"})
    claim_labels = ("factors",)
    user_params = ("c", "freivalds_bits")

    def prepare(self, inp, params):
        A = _square_dense(inp)
        c, fb = _int_params(params)
        return Context(A=A, n=A.shape[0], c=c, fb=fb, norm=A.norm_inf())

    def encode_input(self, ctx):
        return b"frobenius|c=%d|fb=%d|" % (ctx.c, ctx.fb) + encode_matrix(ctx.A)

    def _window(self, ctx, factors):
        return prime_window(frobenius_prime_count(ctx.n, ctx.norm, factors, ctx.c))

    def draw(self, label, stream, ctx, state):
        return _draw_prime(stream, self._window(ctx, state["factors"]))

    def parse(self, label, payload, ctx, state):
        if label == "factors":
            out = []
            for f in wire_list(payload, what="factors"):
                f = [wire_int(x, what="factor") for x in wire_list(f, what="factor")]
                if len(f) < 2:
                    raise SchemaViolation("invariant factors have degree at least 1")
                out.append(f)
            if sum(len(f) - 1 for f in out) > ctx.n:
                raise SchemaViolation("factor degrees exceed n")
            return out
        p = state["prime"]
        d = wire_dict(payload, ("S", "F", "T"), "form")
        return tuple(wire_matrix(d[k], ctx.n, ctx.n, p, k) for k in ("S", "F", "T"))

    def check(self, ctx, state, meter, vrng):
        factors, p = state["factors"], state["prime"]
        S, Fp, T = state["form"]
        n = ctx.n
        if any(f[-1] != 1 for f in factors) or sum(len(f) - 1 for f in factors) != n:
            return "factors"
        for f, g in zip(factors, factors[1:]):
            if poly_divmod_monic(g, f)[1]:
                return "divisibility"
        if [list(r) for r in block_companion(factors, p).rows] != Fp:
            return "form-mismatch"
        Ap = [[x % p for x in r] for r in ctx.A.rows]
        reps = freivalds_reps(p, ctx.fb)
        for _ in range(reps):
            v = [vrng.randrange(p) for _ in range(n)]
            t = mat_vec(T, v, p)
            if mat_vec(S, t, p) != v:
                return "freivalds-ST"
            if mat_vec(S, mat_vec(Fp, t, p), p) != mat_vec(Ap, v, p):
                return "freivalds-SFT"
        meter.residue += 2 * n * n + reps * 5 * n * n
        return None

    def round_bound(self, ctx, state):
        count = frobenius_prime_count(ctx.n, ctx.norm, state["factors"], ctx.c)
        return _bad_prime_fraction(count // ctx.c, prime_window(count)) + Fraction(1, 1 << ctx.fb)

    def honest_prover(self):
        return FrobeniusProver()


class FrobeniusProver:
    def start(self, ctx):
        self.factors, _ = frobenius_form_integer(ctx.A)

    def respond(self, label, ctx, state):
        if label == "factors":
            return self.factors
        p = state["prime"]
        F, S, T = frobenius_form_mod_p(ctx.A.rows, p)
        if F.rows != block_companion(self.factors, p).rows:
            return UNLUCKY
        return {"S": S.tolist(), "F": F.tolist(), "T": T.tolist()}


# --- integer rank ----------------------------------------------------------------------------


def rank_prime_parameters(m: int, n: int, norm: int, c: int = DEFAULT_C) -> tuple:
    """(H, h, count) with h = ceil(log2 H) (at least 1) and count = c h."""
    try:
        H = hadamard_invariant_bound(m, n, norm)
    except ZeroMatrixError:
        H = 1
    h = max(1, (H - 1).bit_length())
    return H, h, c * h


class IntegerRankProtocol(Protocol):
    """Commit r, draw p from c h primes, then the Z_p rank certificate on A mod p."""

    id = "rank-z"
    steps = (("commitment", "rank"), ("challenge", "prime"), ("commitment", "selector"),
             ("challenge", "challenge"), ("response", "response"))
    redrawable = frozenset({"prime"})
    claim_labels = ("rank",)
    user_params = ("c",)

    def prepare(self, inp, params):
        c, _ = _int_params(params)
        if isinstance(inp, LinearOperator):
            if inp.modulus is not None:
                raise DimensionMismatch("integer rank needs an operator over Z")
            A = inp
        else:
            A = aslinearoperator(inp)
        m, n = A.shape
        source = A.source if A.source is not None else A.todense()
        norm = source.norm_inf()
        H, h, count = rank_prime_parameters(m, n, norm, c)
        subset = butterfly_subset_size(m, n)
        magnitude = max(2, count * max(1, count.bit_length()))
        return Context(A=A, m=m, n=n, c=c, H=H, h=h, count=count, subset=subset, magnitude=magnitude)

    def encode_input(self, ctx):
        return b"rank-z|c=%d|" % ctx.c + ctx.A.encoding()

    def operators(self, ctx):
        return [ctx.A]

    def derived_params(self, ctx):
        return {"hadamard": ctx.H, "h": ctx.h, "prime_count": ctx.count, "subset_size": ctx.subset}

    def draw(self, label, stream, ctx, state):
        if label == "prime":
            sample = sample_prime_set(ctx.count, ctx.magnitude, stream, lower=ctx.subset - 1)
            q = sample.primes[stream.randbelow(ctx.count)]
            return q, q
        return _draw_rank_challenge(stream, state["rank"], ctx.m, ctx.n, state["prime"], ctx.subset)

    def parse(self, label, payload, ctx, state):
        if label == "rank":
            return wire_int(payload, 0, min(ctx.m, ctx.n) + 1, "rank")
        if label == "selector":
            d = wire_dict(payload, ("rows", "cols"), "selector")
            r, sel = _parse_claim({"r": str(state["rank"]), **d}, ctx.m, ctx.n)
            return sel
        r = state["rank"]
        return _parse_rank_response(payload, r, r == min(ctx.m, ctx.n), state["prime"])

    def check(self, ctx, state, meter, vrng):
        p = state["prime"]
        op = reduced_operator(ctx.A, p)
        meter.residue += 2 * ctx.m
        return rank_check(op, state["rank"], state["selector"], state["challenge"], state["response"], p, meter)

    def round_bound(self, ctx, state):
        if state["rank"] < min(ctx.m, ctx.n):
            c = Fraction(1, ctx.c)
            return c + (1 - c) / 2
        return Fraction(1, state["prime"])

    def honest_prover(self):
        return IntegerRankProver()


class IntegerRankProver:
    def __init__(self, r: Optional[int] = None):
        self.r = r

    def start(self, ctx):
        self.rows = ctx.A.todense().tolist()
        if self.r is None:
            m, n = ctx.m, ctx.n
            self.r = integer_rank(self.rows) if m * n <= 4096 else integer_rank_multimodular(self.rows)
        self._mod = {}

    def _at(self, p):
        if p not in self._mod:
            rows = [[x % p for x in r] for r in self.rows]
            self._mod = {p: (rows, rank_claim(rows, p))}
        return self._mod[p]

    def respond(self, label, ctx, state):
        if label == "rank":
            return self.r
        p = state["prime"]
        rows, (rank_p, _) = self._at(p)
        if label == "selector":
            if rank_p < self.r:
                return UNLUCKY
            _, sel = rank_claim(rows, p, self.r)
            return {"rows": list(sel.row_indices), "cols": list(sel.col_indices)}
        sel = state["selector"]
        return rank_response(rows, state["rank"], sel, state["challenge"], p)


# --- public wrappers -------------------------------------------------------------------------


def _session(kw):
    return {"k": kw.get("k", 1), "mode": kw.get("mode", "fs"), "seed": kw.get("seed"),
            "params": kw.get("params")}


def _prove(pid, prover, inp, **kw):
    s = _session(kw)
    return prove(prover, pid, inp, s["k"], mode=s["mode"], seed=s["seed"], params=s["params"])


def determinant_prove(B, **session):
    return _prove("det", DeterminantProver(), B, **session)


def determinant_verify(B, transcript, verifier_rng=None) -> Verdict:
    return replay_verify(transcript, B, verifier_rng=verifier_rng)


def charpoly_prove(A, **session):
    return _prove("charpoly", CharpolyProver(), A, **session)


def charpoly_verify(A, transcript, verifier_rng=None) -> Verdict:
    return replay_verify(transcript, A, verifier_rng=verifier_rng)


def frobenius_prove(A, **session):
    return _prove("frobenius", FrobeniusProver(), A, **session)


def frobenius_verify(A, transcript, verifier_rng=None) -> Verdict:
    return replay_verify(transcript, A, verifier_rng=verifier_rng)


def integer_rank_prove(A, **session):
    return _prove("rank-z", IntegerRankProver(), A, **session)


def integer_rank_verify(A, transcript, verifier_rng=None) -> Verdict:
    return replay_verify(transcript, A, verifier_rng=verifier_rng)


def committed_factors(transcript) -> list:
    return [[int(c) for c in f] for f in transcript.rounds[0]["commitment"]["factors"]]


def minpoly_from_frobenius(transcript, verdict: Optional[Verdict], kind: str = "minpoly") -> list:
    """Largest invariant factor (kind="minpoly") or their product ("charpoly")."""
    if verdict is None or not verdict.accepted or transcript.protocol != "frobenius":
        raise TranscriptNotAccepted("minimal polynomial needs an accepted Frobenius transcript")
    factors = committed_factors(transcript)
    if kind == "minpoly":
        return factors[-1]
    if kind == "charpoly":
        g = [1]
        for f in factors:
            g = poly_mul(g, f)
        return g
    raise ValueError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class SignatureVerdict:
    n_plus: int
    n_minus: int
    n_zero: int
    psd: bool

    def as_dict(self) -> dict:
        return {"psd": self.psd, "n_plus": self.n_plus, "n_minus": self.n_minus, "n_zero": self.n_zero}


def sign_variations(coeffs) -> int:
    signs = [c > 0 for c in coeffs if c]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def signature_from_charpoly(g) -> SignatureVerdict:
    """Descartes' rule, exact because every root of g is real."""
    n = len(g) - 1
    n_zero = next(i for i, c in enumerate(g) if c) if any(g) else n
    n_plus = sign_variations(g)
    n_minus = sign_variations([c if i % 2 == 0 else -c for i, c in enumerate(g)])
    if n_plus + n_minus + n_zero != n:
        raise ArithmeticError("characteristic polynomial is not real-rooted")
    return SignatureVerdict(n_plus, n_minus, n_zero, n_minus == 0)


def signature_verify(A, transcript, verdict: Optional[Verdict] = None, verifier_rng=None) -> SignatureVerdict:
    D = _square_dense(A)
    if not D.is_symmetric():
        raise NotSymmetric("signature needs a symmetric matrix")
    if transcript.protocol not in ("charpoly", "psd"):
        raise TranscriptNotAccepted(f"a {transcript.protocol} transcript does not certify the charpoly")
    if verdict is None:
        verdict = replay_verify(transcript, D, verifier_rng=verifier_rng)
    if not verdict.accepted:
        raise TranscriptNotAccepted(f"charpoly transcript rejected ({verdict.failed_check})")
    g = [int(c) for c in transcript.rounds[0]["commitment"]["g"]]
    return signature_from_charpoly(g)


PROTOCOLS = {
    "det": register(DeterminantProtocol()),
    "charpoly": register(CharpolyProtocol()),
    "psd": register(PSDProtocol()),
    "frobenius": register(FrobeniusProtocol()),
    "rank-z": register(IntegerRankProtocol()),
}
