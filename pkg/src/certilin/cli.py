"""Command line: ``certilin <prove|verify|simulate|experiment> <protocol> [flags]``.

Exit codes: 0 accept, 1 reject, 2 usage error, 3 I/O or parse error.
``prove`` and ``verify`` work with non-interactive (Fiat-Shamir) transcripts;
``simulate`` runs both roles in one process and also supports the
interactive mode, seeded by ``--seed`` or ``CERTILIN_SEED``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import re
import sys
from fractions import Fraction
from pathlib import Path

from .cert_integer import minpoly_from_frobenius, signature_verify
from .errors import CertilinError, ParseError, ProtocolError, SchemaViolation
from .io import load_matrix, save_transcript
from .linalg.matrices import aslinearoperator
from .protocol import MODES, Transcript, get_protocol, prove, repetition_schedule, replay_verify

EXIT_ACCEPT, EXIT_REJECT, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

FIELD_PROTOCOLS = ("nonsingular", "rank-upper", "rank")
INTEGER_PROTOCOLS = ("rank-z", "det", "charpoly", "frobenius", "minpoly", "psd")
PROTOCOL_CHOICES = FIELD_PROTOCOLS + INTEGER_PROTOCOLS
# CLI names that reuse another certificate
_PROTOCOL_ID = {"minpoly": "frobenius"}

log = logging.getLogger("certilin")


class UsageError(Exception):
    pass


def parse_target_error(text: str) -> Fraction:
    """Accepts 2^-k, 2**-k, a fraction a/b or a decimal like 1e-6."""
    s = text.strip().replace(" ", "")
    m = re.fullmatch(r"2(?:\^|\*\*)(-?\d+)", s)
    try:
        t = Fraction(2) ** int(m.group(1)) if m else Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse --target-error {text!r}") from exc
    if not 0 < t < 1:
        raise UsageError("--target-error must lie strictly between 0 and 1")
    return t


def _protocol_id(name: str) -> str:
    return _PROTOCOL_ID.get(name, name)


def _params(args) -> dict:
    params = {}
    if args.protocol in FIELD_PROTOCOLS:
        if args.field is None:
            raise UsageError(f"{args.protocol} works over Z_p; pass --field p")
        params["p"] = args.field
        if args.protocol == "nonsingular" and args.subset_size is not None:
            params["subset_size"] = args.subset_size
    else:
        if args.field is not None:
            raise UsageError(f"{args.protocol} works over the integers; --field does not apply")
        if args.c is not None:
            params["c"] = args.c
    return params


def _load_input(args):
    M = load_matrix(args.input, args.format)
    if args.protocol in FIELD_PROTOCOLS:
        return aslinearoperator(M, modulus=args.field)
    if args.protocol == "rank-z":
        return aslinearoperator(M)
    return M


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("CERTILIN_SEED")
    return int(env) if env and env.lstrip("-").isdigit() else env


def _rounds(args, pid, inp, params, mode, seed) -> int:
    if args.target_error is None:
        return args.rounds
    target = parse_target_error(args.target_error)
    # one probe round tells us the per-round bound for this instance
    probe = prove(get_protocol(pid).honest_prover(), pid, inp, 1, mode=mode, seed=seed, params=params)
    v = replay_verify(probe, inp)
    if not v.accepted:
        return 1
    per_round = v.soundness_error_bound / (1 + v.redraws)
    if per_round == 0:
        return 1
    k = repetition_schedule(per_round, target)
    log.info("per-round bound %s, target %s: k = %d", per_round, target, k)
    return max(k, args.rounds if args.rounds_given else 1)


def _result(name: str, t: Transcript, v, inp) -> dict:
    """Certified statement extracted from an accepted transcript."""
    if not v.accepted:
        return {}
    first = t.rounds[0]
    c = first.get("commitment", {})
    if name == "nonsingular":
        return {"nonsingular": True}
    if name == "rank-upper":
        return {"rank_at_most": int(c["r"])}
    if name == "rank":
        return {"rank": int(c["claim"]["r"])}
    if name == "rank-z":
        return {"rank": int(c["rank"])}
    if name == "det":
        return {"det": int(c["delta"])}
    if name == "charpoly":
        return {"charpoly": [int(x) for x in c["g"]]}
    if name == "frobenius":
        return {"invariant_factors": [[int(x) for x in f] for f in c["factors"]]}
    if name == "minpoly":
        return {"minpoly": minpoly_from_frobenius(t, v)}
    if name == "psd":
        return signature_verify(inp, t, v).as_dict()
    return {}


def _report(args, t: Transcript, v, inp) -> int:
    out = {"protocol": args.protocol, "mode": t.mode, "rounds": t.repetitions}
    out.update(v.as_dict())
    out["result"] = _result(args.protocol, t, v, inp)
    if t.aborted:
        out["aborted"] = t.aborted
    print(json.dumps(out, indent=2))
    return EXIT_ACCEPT if v.accepted else EXIT_REJECT


def cmd_prove(args) -> int:
    if args.mode == "interactive":
        raise UsageError("prove writes a non-interactive certificate; use --mode fs or fs-bbs "
                         "(simulate runs the interactive protocol)")
    if args.seed is not None:
        raise UsageError("Fiat-Shamir challenges derive from the input and commitments; --seed is not allowed")
    if not args.transcript:
        raise UsageError("prove needs --transcript FILE")
    pid = _protocol_id(args.protocol)
    params = _params(args)
    inp = _load_input(args)
    k = _rounds(args, pid, inp, params, args.mode, None)
    t = prove(get_protocol(pid).honest_prover(), pid, inp, k, mode=args.mode, params=params)
    save_transcript(t, args.transcript)
    log.info("transcript written to %s", args.transcript)
    return _report(args, t, replay_verify(t, inp, params=params), inp)


def cmd_verify(args) -> int:
    if not args.transcript:
        raise UsageError("verify needs --transcript FILE")
    pid = _protocol_id(args.protocol)
    params = _params(args)
    inp = _load_input(args)
    text = Path(args.transcript).read_text()
    try:
        json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{args.transcript}: not JSON ({exc.msg})", exc.lineno, exc.colno) from exc
    try:
        t = Transcript.from_json(text)
    except SchemaViolation as exc:
        print(json.dumps({"protocol": args.protocol, "accepted": False, "failed_check": "schema",
                          "error": str(exc)}, indent=2))
        return EXIT_REJECT
    if t.protocol != pid:
        print(json.dumps({"protocol": args.protocol, "accepted": False, "failed_check": "protocol",
                          "error": f"transcript certifies {t.protocol!r}"}, indent=2))
        return EXIT_REJECT
    if t.mode == "interactive":
        log.warning("transcript was produced in interactive mode; its challenges came from a recorded seed")
    v = replay_verify(t, inp, params=params)
    return _report(args, t, v, inp)


def cmd_simulate(args) -> int:
    if args.mode != "interactive" and args.seed is not None:
        raise UsageError("Fiat-Shamir challenges derive from the input and commitments; --seed is not allowed")
    pid = _protocol_id(args.protocol)
    params = _params(args)
    inp = _load_input(args)
    seed = _seed(args) if args.mode == "interactive" else None
    k = _rounds(args, pid, inp, params, args.mode, seed)
    t = prove(get_protocol(pid).honest_prover(), pid, inp, k, mode=args.mode, seed=seed, params=params)
    vrng = random.Random(seed) if seed is not None else None
    v = replay_verify(t, inp, params=params, verifier_rng=vrng)
    if args.transcript:
        save_transcript(t, args.transcript)
        log.info("transcript written to %s", args.transcript)
    return _report(args, t, v, inp)


def cmd_experiment(args) -> int:
    from .experiment import STRATEGIES, format_table, rows_to_csv, soundness_experiment

    if args.trials < 100:
        raise UsageError("--trials must be at least 100")
    names = [s.name for s in STRATEGIES.values()
             if args.protocol in (s.name, s.protocol, "all")]
    if not names:
        raise UsageError(f"no cheating strategy for {args.protocol!r}; "
                         f"known: {', '.join(STRATEGIES)}")
    try:
        rounds = tuple(int(x) for x in args.rounds_list.split(","))
    except ValueError as exc:
        raise UsageError("--rounds takes a comma separated list such as 1,2,3") from exc
    if any(k < 1 for k in rounds):
        raise UsageError("round counts must be positive")
    seed = _seed(args)
    seed = 0 if seed is None else seed
    if not isinstance(seed, int):
        seed = int.from_bytes(str(seed).encode(), "big")
    rows = []
    for name in names:
        log.info("running %s", name)
        rows.extend(soundness_experiment(name, rounds, args.trials, seed, workers=args.workers))
    print(format_table(rows))
    if args.csv:
        Path(args.csv).write_text(rows_to_csv(rows))
    return EXIT_ACCEPT if all(r.within_bound for r in rows) else EXIT_REJECT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="certilin", description="Interactive certificates for exact linear algebra.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, modes, default_mode):
        p.add_argument("protocol", choices=PROTOCOL_CHOICES)
        p.add_argument("--input", "-i", required=True, help="matrix file")
        p.add_argument("--format", default="auto", choices=("auto", "matrix-market", "dense-text"))
        p.add_argument("--field", type=int, help="prime p for the protocols over Z_p")
        p.add_argument("--subset-size", type=int, help="|S| for the non-singularity challenge")
        p.add_argument("--c", type=int, help="challenge range / prime-set constant (c >= 3)")
        p.add_argument("--rounds", "-k", type=int, default=None, help="repetitions (default 1)")
        p.add_argument("--target-error", help="soundness target such as 2^-40; picks the repetitions")
        p.add_argument("--mode", choices=modes, default=default_mode)
        p.add_argument("--transcript", "-t", help="transcript JSON file")
        p.add_argument("--seed", help="interactive-mode seed (or CERTILIN_SEED)")
        p.add_argument("--verbose", "-v", action="store_true")

    common(sub.add_parser("prove", help="write a Fiat-Shamir certificate"), MODES, "fs")
    common(sub.add_parser("verify", help="replay-verify a certificate"), MODES, "fs")
    common(sub.add_parser("simulate", help="run prover and verifier in-process"), MODES, "interactive")

    ex = sub.add_parser("experiment", help="Monte-Carlo soundness of cheating provers")
    ex.add_argument("protocol", help="strategy name, protocol id, or 'all'")
    ex.add_argument("--trials", type=int, default=10_000)
    ex.add_argument("--rounds", "-k", dest="rounds_list", default="1,2,3")
    ex.add_argument("--csv", help="also write the table as CSV")
    ex.add_argument("--workers", type=int, default=1)
    ex.add_argument("--seed")
    ex.add_argument("--verbose", "-v", action="store_true")
    return ap


COMMANDS = {"prove": cmd_prove, "verify": cmd_verify, "simulate": cmd_simulate, "experiment": cmd_experiment}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="certilin: %(message)s", stream=sys.stderr)
    if args.command != "experiment":
        args.rounds_given = args.rounds is not None
        if args.rounds is None:
            args.rounds = 1
        if args.rounds < 1:
            print("certilin: error: --rounds must be at least 1", file=sys.stderr)
            return EXIT_USAGE
        if args.seed is not None and args.seed.lstrip("-").isdigit():
            args.seed = int(args.seed)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"certilin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"certilin: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"certilin: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ProtocolError, CertilinError, ValueError) as exc:
        # statement-level problems (non-prime p, asymmetric input for psd, ...)
        print(f"certilin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
