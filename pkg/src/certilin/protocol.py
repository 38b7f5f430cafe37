"""Sessions, transcripts and challenge sources.

Every certificate is a fixed list of (role, label) steps repeated for k
rounds.  The prover supplies commitment and response payloads; the
verifier draws each challenge from a byte stream:

* ``interactive``: a seeded ``random.Random`` (the seed is stored so the
  run can be replayed),
* ``fs``: SHA-256 in counter mode over the domain tag, the input encoding
  and every earlier message (strong Fiat-Shamir),
* ``fs-bbs``: a Blum-Blum-Shub bit stream seeded with the same hash.

Domain tags are ``b"certilin/<protocol>/v<version>"``.

Challenge bytes are turned into values by rejection sampling, so draws
are unbiased and the transcript can store exactly the bytes consumed.
Verification always goes through :func:`replay_verify`, which re-derives
every challenge and compares it byte for byte before running the checks.
"""

from __future__ import annotations

import hashlib
import importlib
import json
import math
import random
import re
import secrets
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .arith import next_prime_3mod4
from .errors import (ChallengeMismatch, ProtocolAbort, SchemaViolation, StateNotCoprime,
                     SubsetTooSmall)

REDRAW_BUDGET = 3
UNLUCKY = {"unlucky": True}
MODES = ("interactive", "fs", "fs-bbs")


# --- wire format -------------------------------------------------------------

_DECIMAL = re.compile(r"-?(0|[1-9][0-9]*)\Z")


def to_wire(x):
    """JSON-ready copy with every integer as a decimal string."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): to_wire(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_wire(v) for v in x]
    if hasattr(x, "tolist"):
        return to_wire(x.tolist())
    raise SchemaViolation(f"cannot encode {type(x).__name__} on the wire")


def canonical(x) -> bytes:
    return json.dumps(to_wire(x), sort_keys=True, separators=(",", ":")).encode()


def wire_int(x, lo=None, hi=None, what="integer") -> int:
    """Parse a canonical decimal string; lo <= value < hi when given."""
    if not isinstance(x, str) or not _DECIMAL.match(x) or x == "-0":
        raise SchemaViolation(f"{what}: expected a canonical decimal string")
    v = int(x)
    if lo is not None and v < lo or hi is not None and v >= hi:
        raise SchemaViolation(f"{what}: {v} out of range")
    return v


def wire_list(x, length=None, what="list") -> list:
    if not isinstance(x, list):
        raise SchemaViolation(f"{what}: expected a list")
    if length is not None and len(x) != length:
        raise SchemaViolation(f"{what}: expected length {length}, got {len(x)}")
    return x


def wire_vector(x, length, p=None, what="vector") -> list:
    hi = p if p is not None else None
    lo = 0 if p is not None else None
    return [wire_int(v, lo, hi, what) for v in wire_list(x, length, what)]


def wire_matrix(x, m, n, p=None, what="matrix") -> list:
    return [wire_vector(r, n, p, what) for r in wire_list(x, m, what)]


def wire_dict(x, keys, what="message") -> dict:
    if not isinstance(x, dict) or set(x) != set(keys):
        raise SchemaViolation(f"{what}: expected fields {sorted(keys)}")
    return x


def _lp(b: bytes) -> bytes:
    return len(b).to_bytes(8, "big") + b


# --- byte streams ---------------------------------------------------------------


class DrawStream:
    """Bytes for one challenge; records everything it hands out."""

    def __init__(self, read):
        self._read = read
        self.consumed = bytearray()

    def randbytes(self, n: int) -> bytes:
        b = self._read(n)
        self.consumed += b
        return b

    def randbelow(self, n: int) -> int:
        """Uniform in [0, n) by masked rejection sampling."""
        if n <= 0:
            raise ValueError("empty range")
        if n == 1:
            return 0
        k = (n - 1).bit_length()
        width = (k + 7) // 8
        mask = (1 << k) - 1
        while True:
            x = int.from_bytes(self.randbytes(width), "big") & mask
            if x < n:
                return x

    def randrange(self, a, b=None):
        if b is None:
            return self.randbelow(a)
        return a + self.randbelow(b - a)


class HashStream:
    """SHA-256(seed || counter) blocks, read sequentially."""

    def __init__(self, seed: bytes):
        self.seed = seed
        self.counter = 0
        self._buf = b""

    def read(self, n: int) -> bytes:
        while len(self._buf) < n:
            self._buf += hashlib.sha256(self.seed + self.counter.to_bytes(8, "big")).digest()
            self.counter += 1
        out, self._buf = self._buf[:n], self._buf[n:]
        return out


def expand(seed: bytes, n_bytes: int) -> bytes:
    return HashStream(seed).read(n_bytes)


def fs_seed(input_encoding: bytes, commitments_so_far: bytes, domain_tag: bytes) -> bytes:
    return hashlib.sha256(_lp(domain_tag) + _lp(input_encoding) + commitments_so_far).digest()


def fs_challenge(input_encoding: bytes, commitments_so_far: bytes, domain_tag: bytes, n_bytes: int) -> bytes:
    """expand(SHA-256(tag || input || commitments), n_bytes) in counter mode."""
    return expand(fs_seed(input_encoding, commitments_so_far, domain_tag), n_bytes)


class BBSGenerator:
    """Blum-Blum-Shub: emit x mod 2, then x <- x**e mod N."""

    def __init__(self, N: int, e: int, x: int):
        if not 1 < x < N or math.gcd(x, N) != 1:
            raise StateNotCoprime(f"seed {x} is not a unit modulo {N} in (1, N)")
        self.N = N
        self.e = e
        self.x = x
        self.bits_emitted = 0

    def next_bit(self) -> int:
        b = self.x & 1
        self.x = pow(self.x, self.e, self.N)
        self.bits_emitted += 1
        return b

    def read(self, n: int) -> bytes:
        out = bytearray()
        for _ in range(n):
            byte = 0
            for _ in range(8):
                byte = (byte << 1) | self.next_bit()
            out.append(byte)
        return bytes(out)


def bbs_next_bit(g: BBSGenerator) -> int:
    return g.next_bit()


_BBS_DEFAULT = None


def default_blum_modulus() -> int:
    """Fixed 512-bit modulus p*q with p, q = 3 mod 4 (public, reproducible)."""
    global _BBS_DEFAULT
    if _BBS_DEFAULT is None:
        digest = hashlib.sha256(b"certilin/bbs-modulus").digest()
        base = int.from_bytes(digest, "big")
        p = next_prime_3mod4((1 << 255) | base)
        q = next_prime_3mod4((1 << 255) | ((base >> 1) ^ (1 << 200)))
        _BBS_DEFAULT = p * q
    return _BBS_DEFAULT


def bbs_from_seed(seed: bytes, N: Optional[int] = None, e: int = 2) -> BBSGenerator:
    N = N or default_blum_modulus()
    x = int.from_bytes(seed, "big") % (N - 3) + 2
    while math.gcd(x, N) != 1:
        x += 1
    return BBSGenerator(N, e, x)


# --- challenge sources --------------------------------------------------------


class ChallengeSource:
    """Verifier randomness; `absorb` sees every message in protocol order."""

    mode = ""

    def __init__(self):
        self.draw_log = []

    def absorb(self, record: bytes) -> None:
        pass

    def _reader(self, context: bytes):
        raise NotImplementedError

    def stream(self, context: bytes) -> DrawStream:
        s = DrawStream(self._reader(context))
        self.draw_log.append((context, s))
        return s


class InteractiveSource(ChallengeSource):
    mode = "interactive"

    def __init__(self, seed: int):
        super().__init__()
        self.seed = seed
        self._rng = random.Random(seed)

    def _reader(self, context):
        return self._rng.randbytes


class FiatShamirSource(ChallengeSource):
    mode = "fs"

    def __init__(self, input_encoding: bytes, domain_tag: bytes):
        super().__init__()
        self.input_encoding = input_encoding
        self.domain_tag = domain_tag
        self._state = bytearray()

    def absorb(self, record: bytes) -> None:
        self._state += _lp(record)

    def seed_for(self, context: bytes) -> bytes:
        return fs_seed(self.input_encoding, bytes(self._state) + _lp(context), self.domain_tag)

    def _reader(self, context):
        return HashStream(self.seed_for(context)).read

    def seal(self) -> str:
        return self.seed_for(b"seal").hex()


class BBSSource(FiatShamirSource):
    mode = "fs-bbs"

    def _reader(self, context):
        return bbs_from_seed(self.seed_for(context)).read


def make_source(mode: str, input_encoding: bytes, domain_tag: bytes, seed=None) -> ChallengeSource:
    if mode == "interactive":
        return InteractiveSource(seed)
    if mode == "fs":
        return FiatShamirSource(input_encoding, domain_tag)
    if mode == "fs-bbs":
        return BBSSource(input_encoding, domain_tag)
    raise ValueError(f"unknown mode {mode!r}")


# --- verdicts and accounting -----------------------------------------------------


@dataclass
class CostReport:
    matvec_count: int = 0
    scalar_op_count: int = 0
    residue_op_count: int = 0
    wall_time: float = 0.0

    def as_dict(self) -> dict:
        return {"matvec_count": self.matvec_count, "scalar_op_count": self.scalar_op_count,
                "residue_op_count": self.residue_op_count, "wall_time": round(self.wall_time, 6)}


class Meter:
    """Verifier-side counters: operator deltas plus explicit scalar/residue ops."""

    def __init__(self, operators=()):
        self.operators = list(operators)
        self._start = [op.counters() for op in self.operators]
        self.scalar = 0
        self.residue = 0
        self._t0 = time.perf_counter()

    def report(self) -> CostReport:
        mv = sc = 0
        for op, (m0, s0) in zip(self.operators, self._start):
            m1, s1 = op.counters()
            mv += m1 - m0
            sc += s1 - s0
        return CostReport(mv, sc + self.scalar, self.residue, time.perf_counter() - self._t0)


@dataclass
class Verdict:
    accepted: bool
    failed_check: Optional[str]
    soundness_error_bound: Fraction
    cost: CostReport = field(default_factory=CostReport)
    redraws: int = 0
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.accepted and self.failed_check is not None:
            raise ValueError("an accepted verdict cannot carry a failed check")
        self.soundness_error_bound = min(Fraction(self.soundness_error_bound), Fraction(1))

    def __bool__(self):
        return self.accepted

    def as_dict(self) -> dict:
        b = self.soundness_error_bound
        return {"accepted": self.accepted, "failed_check": self.failed_check,
                "soundness_error_bound": f"{b.numerator}/{b.denominator}",
                "soundness_error_log2": round(math.log2(b), 3) if b else None,
                "redraws": self.redraws, "cost": self.cost.as_dict()}


def repetition_schedule(per_round_error, target_error) -> int:
    """Smallest k >= 1 with per_round_error**k <= target_error."""
    e = Fraction(per_round_error)
    t = Fraction(target_error)
    if not 0 < e < 1:
        raise ValueError("per-round error must lie in (0, 1)")
    if t >= e:
        return 1

    def log(x):
        return math.log(x.numerator) - math.log(x.denominator)

    # float estimate, then exact correction
    k = max(1, math.ceil(log(t) / log(e)) - 1)
    while e**k > t:
        k += 1
    while k > 1 and e ** (k - 1) <= t:
        k -= 1
    return k


# --- transcripts ------------------------------------------------------------------


@dataclass
class Transcript:
    protocol: str
    version: int
    mode: str
    input_digest_hex: str
    rounds: list
    params: dict
    seal: str = ""
    aborted: Optional[str] = None

    @property
    def repetitions(self) -> int:
        return len(self.rounds)

    def messages(self):
        """(role, round, label, payload) in protocol order, redraws excluded."""
        for i, r in enumerate(self.rounds):
            for role in ("commitment", "challenge", "response"):
                for label, payload in r.get(role, {}).items():
                    yield role, i, label, payload

    def to_dict(self) -> dict:
        d = {"protocol": self.protocol, "version": self.version, "mode": self.mode,
             "input_digest_hex": self.input_digest_hex, "rounds": self.rounds,
             "params": self.params, "seal": self.seal}
        if self.aborted is not None:
            d["aborted"] = self.aborted
        return d

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    @classmethod
    def from_dict(cls, d) -> Transcript:
        try:
            t = cls(d["protocol"], int(d["version"]), d["mode"], d["input_digest_hex"],
                    d["rounds"], d["params"], d.get("seal", ""), d.get("aborted"))
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed transcript: {exc}") from exc
        if not isinstance(t.rounds, list) or not isinstance(t.params, dict):
            raise SchemaViolation("malformed transcript: rounds/params")
        return t

    @classmethod
    def from_json(cls, text: str) -> Transcript:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"transcript is not JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise SchemaViolation("transcript must be a JSON object")
        return cls.from_dict(d)


# --- protocol definitions -------------------------------------------------------


class Context:
    """Public parameters of one certificate instance, shared by both roles."""

    def __init__(self, **kw):
        self.__dict__.update(kw)


class Protocol:
    """Schema plus verifier logic; subclasses fill in the hooks.

    ``steps`` lists (role, label) per round.  Labels in ``redrawable`` are
    challenges the prover may answer with :data:`UNLUCKY`; ``claim_labels``
    are commitments that must agree across all rounds.
    """

    id = ""
    version = 1
    steps: tuple = ()
    redrawable: frozenset = frozenset()
    claim_labels: tuple = ()
    user_params: tuple = ()

    @property
    def domain_tag(self) -> bytes:
        return f"certilin/{self.id}/v{self.version}".encode()

    def prepare(self, inp, params: dict) -> Context:
        raise NotImplementedError

    def encode_input(self, ctx) -> bytes:
        raise NotImplementedError

    def operators(self, ctx) -> list:
        return []

    def draw(self, label, stream, ctx, state):
        """(value, wire form) of the challenge."""
        raise NotImplementedError

    def parse(self, label, payload, ctx, state):
        """Wire payload -> value; raise SchemaViolation when malformed."""
        raise NotImplementedError

    def check(self, ctx, state, meter, vrng) -> Optional[str]:
        raise NotImplementedError

    def round_bound(self, ctx, state) -> Fraction:
        raise NotImplementedError

    def derived_params(self, ctx) -> dict:
        return {}

    def honest_prover(self):
        raise NotImplementedError


_REGISTRY = {}


def register(proto: Protocol) -> Protocol:
    _REGISTRY[proto.id] = proto
    return proto


def get_protocol(pid) -> Protocol:
    if isinstance(pid, Protocol):
        return pid
    if pid not in _REGISTRY:
        _load_certificates()
    try:
        return _REGISTRY[pid]
    except KeyError:
        raise SchemaViolation(f"unknown protocol {pid!r}") from None


def _load_certificates() -> None:
    # certificate modules register themselves on import
    for name in ("cert_field", "cert_integer"):
        importlib.import_module(f"{__package__}.{name}")


def protocol_ids() -> list:
    _load_certificates()
    return sorted(_REGISTRY)


def _message_record(role: str, rnd: int, label: str, wire) -> bytes:
    return _lp(f"{role}:{rnd}:{label}".encode()) + _lp(canonical(wire))


def _challenge_context(rnd: int, label: str, attempt: int) -> bytes:
    return f"challenge:{rnd}:{label}:{attempt}".encode()


def _input_digest(proto, ctx) -> tuple:
    enc = proto.encode_input(ctx)
    return enc, hashlib.sha256(enc).hexdigest()


def _public_params(proto, params) -> dict:
    return {k: params[k] for k in proto.user_params if k in params and params[k] is not None}


# --- prover side ---------------------------------------------------------------------


def prove(prover, protocol, inp, k: int = 1, *, mode: str = "fs", seed=None,
          params=None) -> Transcript:
    """Run the prover against the challenge source and record the transcript.

    The prover's ``respond(label, ctx, state)`` returns a wire payload or
    :data:`UNLUCKY`; it may raise :class:`ProtocolAbort`.
    """
    proto = get_protocol(protocol)
    if k < 1:
        raise ValueError("at least one round is required")
    params = _public_params(proto, dict(params or {}))
    ctx = proto.prepare(inp, params)
    enc, digest = _input_digest(proto, ctx)
    if mode == "interactive" and seed is None:
        seed = secrets.randbits(64)
    source = make_source(mode, enc, proto.domain_tag, seed)
    stored = to_wire(params)
    if mode == "interactive":
        stored["seed"] = str(seed)
    stored["derived"] = to_wire(proto.derived_params(ctx))
    t = Transcript(proto.id, proto.version, mode, digest, [], stored)
    if hasattr(prover, "start"):
        prover.start(ctx)
    for rnd in range(k):
        rec = {"commitment": {}, "challenge": {}, "response": {}, "redraws": []}
        t.rounds.append(rec)
        state = {}
        i = 0
        attempt = {}
        while i < len(proto.steps):
            role, label = proto.steps[i]
            if role == "challenge":
                a = attempt.get(label, 0)
                s = source.stream(_challenge_context(rnd, label, a))
                value, wire = proto.draw(label, s, ctx, state)
                rec["challenge"][label] = {"bytes": bytes(s.consumed).hex(), "value": to_wire(wire)}
                state[label] = value
                i += 1
                continue
            try:
                payload = prover.respond(label, ctx, state)
            except ProtocolAbort as exc:
                t.aborted = f"round {rnd}, {label}: {exc}"
                t.seal = source.seal() if hasattr(source, "seal") else ""
                return t
            prev = proto.steps[i - 1] if i else None
            if payload == UNLUCKY and prev and prev[0] == "challenge" and prev[1] in proto.redrawable:
                ch = rec["challenge"].pop(prev[1])
                rec["redraws"].append({"label": prev[1], "bytes": ch["bytes"], "value": ch["value"],
                                       "reply": label})
                source.absorb(_message_record("redraw", rnd, label, UNLUCKY))
                attempt[prev[1]] = attempt.get(prev[1], 0) + 1
                if attempt[prev[1]] > REDRAW_BUDGET:
                    t.aborted = f"round {rnd}: redraw budget exceeded"
                    t.seal = source.seal() if hasattr(source, "seal") else ""
                    return t
                i -= 1
                continue
            payload = to_wire(payload)
            rec[role][label] = payload
            source.absorb(_message_record(role, rnd, label, payload))
            try:
                state[label] = proto.parse(label, payload, ctx, state)
            except SchemaViolation:
                # a malformed message is recorded as sent; the verifier rejects it
                t.seal = source.seal() if hasattr(source, "seal") else ""
                return t
            i += 1
    if hasattr(source, "seal"):
        t.seal = source.seal()
    return t


# --- verifier side --------------------------------------------------------------------


def _reject(check, bound, meter, redraws=0, **details) -> Verdict:
    return Verdict(False, check, bound, meter.report(), redraws, details)


def replay_verify(cert: Transcript, inp, *, params=None, verifier_rng=None,
                  strict: bool = False) -> Verdict:
    """Re-derive every challenge from the recorded messages, then check each round.

    Any difference between recorded and re-derived challenge bytes rejects
    (``challenge-mismatch``); so does a malformed message (``schema``).
    With ``strict`` those two cases raise instead.  ``params`` pins
    public parameters the caller insists on (e.g. the field prime).
    """
    if isinstance(cert, dict):
        cert = Transcript.from_dict(cert)
    vrng = verifier_rng if verifier_rng is not None else random.SystemRandom()
    proto = get_protocol(cert.protocol)
    meter = Meter()
    bound = Fraction(1)
    try:
        if cert.version != proto.version:
            raise SchemaViolation(f"version {cert.version} is not {proto.version}")
        if cert.mode not in MODES:
            raise SchemaViolation(f"unknown mode {cert.mode!r}")
        user = {}
        for key in proto.user_params:
            if key in cert.params:
                user[key] = cert.params[key]
        for key, want in (params or {}).items():
            if want is not None and key in proto.user_params and str(user.get(key)) != str(want):
                return _reject("params", bound, meter, key=key)
        user = {k: (wire_int(v, what=k) if isinstance(v, str) and _DECIMAL.match(v) else v)
                for k, v in user.items()}
        ctx = proto.prepare(inp, user)
        enc, digest = _input_digest(proto, ctx)
        if digest != cert.input_digest_hex:
            return _reject("input-digest", bound, meter)
        seed = None
        if cert.mode == "interactive":
            seed = wire_int(cert.params.get("seed"), what="seed")
        source = make_source(cert.mode, enc, proto.domain_tag, seed)
        meter = Meter(proto.operators(ctx))
        if not cert.rounds:
            raise SchemaViolation("no rounds")
        if cert.aborted is not None:
            return _reject("abort", bound, meter, reason=cert.aborted)
        states = []
        total_redraws = 0
        round_bounds = Fraction(1)
        for rnd, rec in enumerate(cert.rounds):
            wire_dict(rec, ("commitment", "challenge", "response", "redraws"), f"round {rnd}")
            redraws = list(wire_list(rec["redraws"], what="redraws"))
            if len(redraws) > REDRAW_BUDGET * max(1, len(proto.redrawable)):
                return _reject("redraw-budget", bound, meter)
            expected = {role: {l for r, l in proto.steps if r == role} for role in ("commitment", "challenge", "response")}
            for role in expected:
                if not isinstance(rec[role], dict) or set(rec[role]) != expected[role]:
                    raise SchemaViolation(f"round {rnd}: {role} labels do not match the schema")
            state = {}
            attempt = {}
            for role, label in proto.steps:
                if role == "challenge":
                    while redraws and isinstance(redraws[0], dict) and redraws[0].get("label") == label:
                        red = wire_dict(redraws.pop(0), ("label", "bytes", "value", "reply"), "redraw")
                        a = attempt.get(label, 0)
                        _rederive(proto, source, ctx, state, rnd, label, a, red)
                        source.absorb(_message_record("redraw", rnd, red["reply"], UNLUCKY))
                        attempt[label] = a + 1
                        total_redraws += 1
                    if attempt.get(label, 0) > REDRAW_BUDGET:
                        return _reject("redraw-budget", bound, meter)
                    state[label] = _rederive(proto, source, ctx, state, rnd, label,
                                             attempt.get(label, 0), rec["challenge"][label])
                    continue
                payload = rec[role][label]
                state[label] = proto.parse(label, payload, ctx, state)
                source.absorb(_message_record(role, rnd, label, payload))
            if redraws:
                raise SchemaViolation(f"round {rnd}: unmatched redraw records")
            n_red = sum(attempt.values())
            round_bounds *= min(Fraction(1), proto.round_bound(ctx, state) * (1 + n_red))
            states.append(state)
        if hasattr(source, "seal") and cert.seal != source.seal():
            raise ChallengeMismatch("transcript seal does not match")
        for label in proto.claim_labels:
            first = canonical(cert.rounds[0]["commitment"].get(label, cert.rounds[0]["response"].get(label)))
            for rec in cert.rounds[1:]:
                here = canonical(rec["commitment"].get(label, rec["response"].get(label)))
                if here != first:
                    return _reject("inconsistent-claims", bound, meter, label=label)
        bound = round_bounds
        for rnd, state in enumerate(states):
            failed = proto.check(ctx, state, meter, vrng)
            if failed is not None:
                return _reject(failed, bound, meter, total_redraws, round=rnd)
        return Verdict(True, None, bound, meter.report(), total_redraws,
                       {"rounds": len(states), "states": states})
    except ChallengeMismatch as exc:
        if strict:
            raise
        return _reject("challenge-mismatch", bound, meter, error=str(exc))
    except SchemaViolation as exc:
        if strict:
            raise
        return _reject("schema", bound, meter, error=str(exc))
    except SubsetTooSmall as exc:
        if strict:
            raise
        return _reject("subset-too-small", bound, meter, error=str(exc))


def _rederive(proto, source, ctx, state, rnd, label, attempt, recorded):
    if not isinstance(recorded, dict) or "bytes" not in recorded or "value" not in recorded:
        raise SchemaViolation(f"round {rnd}: challenge {label} is malformed")
    rec = recorded
    s = source.stream(_challenge_context(rnd, label, attempt))
    value, wire = proto.draw(label, s, ctx, state)
    if bytes(s.consumed).hex() != rec["bytes"]:
        raise ChallengeMismatch(f"round {rnd}: challenge {label} bytes differ")
    if canonical(wire) != canonical(rec["value"]):
        raise ChallengeMismatch(f"round {rnd}: challenge {label} value differs")
    return value


def run_interactive(prover, verifier, protocol_id, inp, k: int = 1, *, mode="interactive", seed=None,
                    params=None, verifier_rng=None):
    """Both roles in one process: (Transcript, Verdict).

    `verifier` is accepted for symmetry with the two-party setting; the
    verifier logic is the registered protocol itself, so it is ignored
    unless it names a different protocol.
    """
    proto = get_protocol(protocol_id)
    if verifier is not None and getattr(verifier, "id", proto.id) != proto.id:
        raise SchemaViolation("prover and verifier disagree on the protocol")
    if prover is None:
        prover = proto.honest_prover()
    t = prove(prover, proto, inp, k, mode=mode, seed=seed, params=params)
    v = replay_verify(t, inp, verifier_rng=verifier_rng)
    return t, v
