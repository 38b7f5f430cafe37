"""Monte-Carlo soundness experiments: cheating provers against the verifiers.

Each strategy fixes a false statement and a prover that tries to get it
accepted.  A trial runs k interactive rounds with an independent seed;
the empirical acceptance rate is compared with the per-round bound raised
to the k-th power, plus three binomial standard deviations.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction

from .arith import poly_add, poly_eval, poly_mul
from .cert_field import rank_claim, rank_upper_prove, upper_bound_matrix
from .cert_integer import DEFAULT_C, _shifted, plu_payload
from .errors import InconsistentSystem, MatrixNonsingular, ProtocolAbort
from .linalg.elimination import integer_determinant, nullspace_vector, rank_mod_p, solve_mod_p
from .linalg.frobenius import charpoly_integer, frobenius_form_mod_p
from .linalg.matrices import SubmatrixSelector, aslinearoperator, block_companion, companion_matrix
from .protocol import get_protocol, prove, replay_verify


# --- cheating provers --------------------------------------------------------------------


class SingularNonsingularCheat:
    """Claims A is non-singular; answers whenever b happens to lie in the column space."""

    def __init__(self, rows, p):
        self.rows, self.p = rows, p

    def respond(self, label, ctx, state):
        if label == "claim":
            return "nonsingular"
        try:
            return solve_mod_p(self.rows, state["b"], self.p)
        except InconsistentSystem as exc:
            raise ProtocolAbort("b outside the column space") from exc


class LowRankUpperCheat:
    """Claims rank <= r although the rank is larger; needs M to be singular."""

    def __init__(self, rows, p, r):
        self.rows, self.p, self.r = rows, p, r

    def respond(self, label, ctx, state):
        if label == "r":
            return self.r
        U, V = state["UV"]
        return rank_upper_prove(self.rows, self.r, U, V, self.p)


class HighRankCheat:
    """Claims rank r + 1 with some (singular) (r+1) x (r+1) selection."""

    def __init__(self, rows, p):
        self.rows, self.p = rows, p
        r, sel = rank_claim(rows, p)
        m, n = len(rows), len(rows[0])
        extra_r = next(i for i in range(m) if i not in sel.row_indices)
        extra_c = next(j for j in range(n) if j not in sel.col_indices)
        self.r = r + 1
        self.sel = SubmatrixSelector(sorted(sel.row_indices + (extra_r,)), sorted(sel.col_indices + (extra_c,)))

    def respond(self, label, ctx, state):
        if label == "claim":
            return {"r": self.r, "rows": list(self.sel.row_indices), "cols": list(self.sel.col_indices)}
        b, U, V = state["challenge"]
        sub = [[self.rows[i][j] for j in self.sel.col_indices] for i in self.sel.row_indices]
        try:
            lower = solve_mod_p(sub, b, self.p)
        except InconsistentSystem as exc:
            raise ProtocolAbort("b outside the column space of the selection") from exc
        out = {"w_lower": lower}
        if U is not None:
            M = upper_bound_matrix(self.rows, self.r, U, V, self.p)
            try:
                out["w_upper"] = nullspace_vector(M, self.p)
            except MatrixNonsingular:
                out["w_upper"] = [1] + [0] * self.r
        return out


class WrongCharpolyCheat:
    """Commits g = charpoly + prod_{i < n-1} (X - i).

    g agrees with det(lambda I - A) exactly at lambda in {0, ..., n-2}; there
    the prover answers honestly.  Elsewhere it sends the true determinant,
    which the evaluation check catches.
    """

    def __init__(self, A_rows):
        n = len(A_rows)
        self.true = charpoly_integer(A_rows)
        bump = [1]
        for i in range(n - 1):
            bump = poly_mul(bump, [-i, 1])
        self.g = poly_add(self.true, bump)

    def respond(self, label, ctx, state):
        if label == "g":
            return self.g
        if label == "delta":
            return poly_eval(self.true, state["lambda"])
        return plu_payload(_shifted(ctx.A, state["lambda"]), state["prime"])


class WrongDeterminantCheat:
    def __init__(self, rows, offset=1):
        self.rows = rows
        self.delta = integer_determinant(rows) + offset

    def respond(self, label, ctx, state):
        if label == "delta":
            return self.delta
        return plu_payload(self.rows, state["prime"])


class TamperedFrobeniusCheat:
    """Commits the Frobenius form with one coefficient changed."""

    def __init__(self, factors, shift=1):
        self.factors = [list(f) for f in factors]
        self.factors[-1][0] += shift

    def respond(self, label, ctx, state):
        if label == "factors":
            return self.factors
        p = state["prime"]
        F, S, T = frobenius_form_mod_p(ctx.A.rows, p)
        return {"S": S.tolist(), "F": block_companion(self.factors, p).tolist(), "T": T.tolist()}


class LowIntegerRankCheat:
    def __init__(self, rows, r):
        self.rows, self.r = rows, r

    def respond(self, label, ctx, state):
        p = state.get("prime")
        if label == "rank":
            return self.r
        rows = [[x % p for x in row] for row in self.rows]
        if label == "selector":
            _, sel = rank_claim(rows, p, self.r)
            return {"rows": list(sel.row_indices), "cols": list(sel.col_indices)}
        b, U, V = state["challenge"]
        sel = state["selector"]
        sub = [[rows[i][j] for j in sel.col_indices] for i in sel.row_indices]
        out = {"w_lower": solve_mod_p(sub, b, p) if self.r else []}
        if U is not None:
            out["w_upper"] = rank_upper_prove(rows, self.r, U, V, p)
        return out


# --- strategies -------------------------------------------------------------------------------


def _singular_matrix(n, p, rng):
    """Random n x n matrix over Z_p of rank exactly n - 1."""
    while True:
        rows = [[rng.randrange(p) for _ in range(n)] for _ in range(n - 1)]
        coeffs = [rng.randrange(p) for _ in range(n - 1)]
        last = [sum(c * r[j] for c, r in zip(coeffs, rows)) % p for j in range(n)]
        A = rows + [last]
        if rank_mod_p(A, p) == n - 1:
            return A


def _rank_r_matrix(m, n, r, p, rng):
    while True:
        L = [[rng.randrange(p) for _ in range(r)] for _ in range(m)]
        R = [[rng.randrange(p) for _ in range(n)] for _ in range(r)]
        A = [[sum(L[i][k] * R[k][j] for k in range(r)) % p for j in range(n)] for i in range(m)]
        if rank_mod_p(A, p) == r:
            return A


@dataclass(frozen=True)
class Strategy:
    name: str
    protocol: str
    description: str


STRATEGIES = {
    s.name: s for s in [
        Strategy("nonsingular-singular", "nonsingular", "singular A claimed non-singular (bound 1/|S|)"),
        Strategy("rank-upper-low", "rank-upper", "rank upper bound below the true rank (bound 1/2)"),
        Strategy("rank-high", "rank", "rank claimed one above the truth (bound 1/p)"),
        Strategy("charpoly-wrong-g", "charpoly", "wrong characteristic polynomial (bound 1/c)"),
        Strategy("det-wrong-delta", "det", "determinant off by one (bound: bad primes)"),
        Strategy("frobenius-tamper", "frobenius", "one invariant-factor coefficient changed"),
        Strategy("rank-z-low", "rank-z", "integer rank claimed one below the truth"),
    ]
}


def _bound(pid, inp, params, state=None):
    proto = get_protocol(pid)
    return proto.round_bound(proto.prepare(inp, params), state or {})


def build_instance(strategy: str, instance_seed: int = 0, p=None, n=None, subset_size=None):
    """(input, params, prover, per-round bound) for a strategy."""
    rng = random.Random(instance_seed)
    if strategy == "nonsingular-singular":
        p = p or 2
        n = n or 4
        A = _singular_matrix(n, p, rng)
        s = subset_size or p
        return aslinearoperator(A, modulus=p), {"p": p, "subset_size": s}, SingularNonsingularCheat(A, p), Fraction(1, s)
    if strategy == "rank-upper-low":
        p = p or 101
        n = n or 4
        A = _rank_r_matrix(n, n, n - 1, p, rng)
        return aslinearoperator(A, modulus=p), {"p": p}, LowRankUpperCheat(A, p, n - 2), Fraction(1, 2)
    if strategy == "rank-high":
        p = p or 101
        n = n or 4
        A = _rank_r_matrix(n, n, n - 2, p, rng)
        return aslinearoperator(A, modulus=p), {"p": p}, HighRankCheat(A, p), Fraction(1, p)
    if strategy == "charpoly-wrong-g":
        n = n or 4
        A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        return A, {"c": DEFAULT_C}, WrongCharpolyCheat(A), _bound("charpoly", A, {"c": DEFAULT_C})
    if strategy == "det-wrong-delta":
        n = n or 4
        A = [[rng.randint(-9, 9) for _ in range(n)] for _ in range(n)]
        return A, {}, WrongDeterminantCheat(A), _bound("det", A, {})
    if strategy == "frobenius-tamper":
        n = n or 3
        f = [rng.randint(-5, 5) for _ in range(n)] + [1]
        A = companion_matrix(f)
        return A, {}, TamperedFrobeniusCheat([f]), _bound("frobenius", A, {}, {"factors": [f]})
    if strategy == "rank-z-low":
        A = [[2, 0], [0, 2]]
        c = Fraction(1, DEFAULT_C)
        return aslinearoperator(A), {}, LowIntegerRankCheat(A, 1), c + (1 - c) / 2
    raise KeyError(f"unknown strategy {strategy!r}")


def _trial_seed(base: int, strategy: str, k: int, i: int) -> int:
    h = hashlib.sha256(f"{base}:{strategy}:{k}:{i}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def run_trials(strategy: str, k: int, trials: int, seed: int = 0, **opts) -> int:
    """Number of accepted trials out of `trials` runs of k rounds."""
    return _chunk((strategy, k, trials, seed, 0, dict(opts)))


@dataclass
class ExperimentRow:
    strategy: str
    protocol: str
    rounds: int
    trials: int
    accepted: int
    rate: float
    bound: float
    sigma: float
    within_bound: bool


def _chunk(args):
    strategy, k, count, seed, offset, opts = args
    inp, params, prover, _ = build_instance(strategy, **opts)
    pid = STRATEGIES[strategy].protocol
    acc = 0
    for i in range(offset, offset + count):
        s = _trial_seed(seed, strategy, k, i)
        t = prove(prover, pid, inp, k, mode="interactive", seed=s, params=params)
        if t.aborted is None:
            acc += replay_verify(t, inp, verifier_rng=random.Random(s ^ 0x5EED)).accepted
    return acc


def soundness_experiment(strategy: str, rounds=(1,), trials: int = 10_000, seed: int = 0,
                         workers: int = 1, **opts) -> list:
    """One row per round count k: empirical rate against bound**k + 3 sigma."""
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    _, _, _, per_round = build_instance(strategy, **opts)
    rows = []
    for k in rounds:
        if workers > 1:
            size = -(-trials // workers)
            jobs = [(strategy, k, min(size, trials - o), seed, o, dict(opts)) for o in range(0, trials, size)]
            with ProcessPoolExecutor(workers) as ex:
                accepted = sum(ex.map(_chunk, jobs))
        else:
            accepted = _chunk((strategy, k, trials, seed, 0, dict(opts)))
        bound = float(min(Fraction(1), per_round ** k))
        sigma = math.sqrt(bound * (1 - bound) / trials)
        rate = accepted / trials
        rows.append(ExperimentRow(strategy, STRATEGIES[strategy].protocol, k, trials, accepted, rate,
                                  bound, sigma, rate <= bound + 3 * sigma))
    return rows


def rows_to_csv(rows) -> str:
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(ExperimentRow.__dataclass_fields__))
    w.writeheader()
    for r in rows:
        w.writerow(asdict(r))
    return buf.getvalue()


def format_table(rows) -> str:
    head = f"{'strategy':<22} {'k':>2} {'trials':>7} {'rate':>9} {'bound':>9} {'+3sigma':>9}  ok"
    lines = [head]
    for r in rows:
        lines.append(f"{r.strategy:<22} {r.rounds:>2} {r.trials:>7} {r.rate:>9.5f} {r.bound:>9.5f} "
                     f"{r.bound + 3 * r.sigma:>9.5f}  {'yes' if r.within_bound else 'NO'}")
    return "\n".join(lines)
