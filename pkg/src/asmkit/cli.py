"""``asm`` command line: check, run, transform and verify algorithms."""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .algorithm import PreconditionError
from .bundle import load_bundle
from .core import ASMError, decode_value, encode_value
from .interp import (
    BUDGET_EXHAUSTED, OUTPUT_PRODUCED, DepthExceeded, OracleEnv, oracle_dispatch_run, run,
)
from .normalize import normalize
from .parser import CheckError, ParseError, parse, print_unit
from .prune import prune
from .separate import separate_all
from .serialize import serialize

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CHECK = 4
EXIT_RUN = 5
EXIT_VERIFY = 6


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 as well; keep it explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _diag(msg: str, as_json: bool = False, kind: str = "error") -> None:
    if as_json:
        print(json.dumps({kind: msg}), file=sys.stderr)
        return
    color = os.environ.get("ASM_COLOR", "") not in ("", "0", "never")
    if color:
        msg = f"\x1b[31m{msg}\x1b[0m"
    print(msg, file=sys.stderr)


def _read(path: str):
    with open(path) as fh:
        return parse(fh.read())


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _value(text: str):
    try:
        return decode_value(json.loads(text))
    except (json.JSONDecodeError, ValueError):
        return decode_value(text)


def cmd_check(args) -> int:
    alg = _read(args.file)
    print(f"ok: {len(alg.decls)} declarations")
    return EXIT_OK


def cmd_run(args) -> int:
    inputs = [_value(v) for v in args.input]
    env = OracleEnv.load(args.oracle) if args.oracle else None
    if args.file.endswith(".json"):
        bundle = load_bundle(args.file)
        bundle.validate()
        result = oracle_dispatch_run(bundle, 0, inputs, args.max_steps, args.max_depth, env)
    else:
        alg = _read(args.file)
        trace = open(args.trace, "w") if args.trace else None
        try:
            result = run(alg, inputs, env, args.max_steps, keep_records=False, trace_file=trace)
        finally:
            if trace:
                trace.close()
    out = result.output
    print(json.dumps({"status": result.status,
                      "output": encode_value(out) if out is not None else None},
                     separators=(",", ":")))
    return EXIT_OK if result.status in (OUTPUT_PRODUCED, BUDGET_EXHAUSTED) else EXIT_RUN


def cmd_separate(args) -> int:
    alg = _read(args.file)
    only = [s for s in args.only.split(",") if s] if args.only else None
    cert = separate_all(alg, only)
    _emit(print_unit(cert.algorithm), args.output)
    if args.cert:
        with open(args.cert, "w") as fh:
            json.dump(cert.to_json(), fh, sort_keys=True, indent=2)
    return EXIT_OK


def cmd_normalize(args) -> int:
    alg = _read(args.file)
    _emit(print_unit(alg.evolve(program=normalize(alg.program).to_rule())), args.output)
    return EXIT_OK


def cmd_serialize(args) -> int:
    ser = serialize(_read(args.file))
    _emit(print_unit(ser.algorithm), args.output)
    if args.emit_classification:
        with open(args.emit_classification, "w") as fh:
            json.dump(ser.classification_json(), fh, sort_keys=True, indent=2)
    return EXIT_OK


def cmd_prune(args) -> int:
    bundle = load_bundle(args.bundle)
    pruned = prune(bundle, assume_serialized=args.assume_serialized,
                   literal_return=args.literal_return)
    _emit(print_unit(pruned.algorithm), args.output)
    return EXIT_OK


def cmd_cosim(args) -> int:
    from .cosim import suites
    p = args.pass_
    if p == "separate":
        rep = suites.separation_suite(args.seed, args.count, args.steps or 20)
        rep.absorb(suites.separation_hand_cases())
    elif p == "normalize":
        rep = suites.normalization_suite(args.seed, args.count, args.steps or 50)
        rep.absorb(suites.merge_example_report())
    elif p == "serialize":
        rep = suites.serialization_suite(args.seed, args.count, args.steps or 10)
    else:
        rep = suites.pruning_suite(args.steps or 200_000)
        rep.absorb(suites.relativized_suite(args.steps or 200_000))
    rep.info["seed"] = args.seed
    _emit(rep.dumps() + "\n", args.output)
    return EXIT_OK if rep.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="asm", description="Abstract state machine workbench.")
    p.add_argument("--json", action="store_true", help="diagnostics as JSON on stderr")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="parse and type-check a unit")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("run", help="run an algorithm, or a bundle by oracle dispatch")
    s.add_argument("file")
    s.add_argument("--input", action="append", default=[], help="input value (repeatable)")
    s.add_argument("--oracle", help="JSON table answering extrinsic queries")
    s.add_argument("--max-steps", type=int, default=100_000)
    s.add_argument("--max-depth", type=int, default=64)
    s.add_argument("--trace", help="write a JSON-lines step trace here")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("separate", help="make dynamic functions initially uninformative")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.add_argument("--only", help="comma-separated symbols to separate")
    s.add_argument("--cert", help="write the renaming certificate here")
    s.set_defaults(func=cmd_separate)

    s = sub.add_parser("normalize", help="rewrite to a compound conditional")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("serialize", help="one extrinsic query per step")
    s.add_argument("file")
    s.add_argument("-o", "--output")
    s.add_argument("--emit-classification", help="write the clause classification here")
    s.set_defaults(func=cmd_serialize)

    s = sub.add_parser("prune", help="inline a closed bundle into one algorithm")
    s.add_argument("bundle")
    s.add_argument("-o", "--output")
    s.add_argument("--assume-serialized", action="store_true")
    s.add_argument("--literal-return", action="store_true",
                   help="return after the first mega-step of a call (for study only)")
    s.set_defaults(func=cmd_prune)

    s = sub.add_parser("cosim", help="run a verification suite")
    s.add_argument("--pass", dest="pass_", required=True,
                   choices=["separate", "normalize", "serialize", "prune"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--steps", type=int, default=None,
                   help="steps / states / mega-steps per case, or the pruning budget")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_cosim)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        _diag(f"parse error: {exc}", args.json)
        return EXIT_PARSE
    except (CheckError, PreconditionError) as exc:
        _diag(f"check error: {exc}", args.json)
        return EXIT_CHECK
    except DepthExceeded as exc:
        _diag(f"run error: {exc}", args.json)
        return EXIT_RUN
    except ASMError as exc:
        _diag(f"error: {exc}", args.json)
        return EXIT_CHECK
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        _diag(f"usage error: {exc}", args.json)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
