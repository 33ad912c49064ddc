"""``albertc``: typecheck, compile, run and fuzz Albert programs.

Exit codes: 0 success, 1 user error (bad source, ill-typed program, bad
input), 2 the contract failed at run time, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import types as T
from .compiler import compile_contract, compile_value, decode_value
from .errors import AlbertError, ContractFailure, MichFailure, MichTypeError
from .evaluator import eval_function
from .michelson import print_michelson, print_mvalue, run_contract
from .michelson.core import Pair
from .syntax import ast as A
from .syntax import parse_program, parse_value, print_type, print_value
from .typer import dump_typed, typecheck_program

EXIT_OK = 0
EXIT_USER = 1
EXIT_FAILURE = 2
EXIT_INTERNAL = 3


class UserError(Exception):
    pass


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise UserError(f"{path}: no such file")
    try:
        program = parse_program(p.read_text())
    except AlbertError as exc:
        raise UserError(f"{path}:{exc}") from None
    try:
        typed = typecheck_program(program)
    except AlbertError as exc:
        raise UserError(f"{path}:{exc}") from None
    return program, typed


def _entry(typed, name: str | None) -> str:
    if not typed.functions:
        raise UserError("program defines no functions")
    if name is None:
        return typed.names[-1]
    if name not in typed.names:
        raise UserError(f"no function named {name}")
    return name


def _input(program, fn, text: str | None) -> A.Value:
    if text is None:
        if fn.input == A.UNIT:
            return A.RecordVal(())
        raise UserError(f"--input is required for {fn.name}")
    aliases = dict(program.type_aliases)
    try:
        v = parse_value(text, fn.input, aliases)
    except AlbertError as exc:
        raise UserError(f"input: {exc}") from None

    def norm(t):
        return T.normalize_type(T.expand_aliases(t, aliases))

    v = T.map_value_types(v, norm)
    if not T.check_value(v, fn.input):
        raise UserError(f"input does not have type {print_type(fn.input)}")
    return v


def _compile(typed, entry: str):
    try:
        return compile_contract(typed, entry)
    except MichTypeError:
        raise
    except AlbertError as exc:
        raise UserError(str(exc)) from None


# --------------------------------------------------------------- commands


def cmd_typecheck(args, out) -> int:
    _, typed = _load(args.file)
    if args.dump:
        out.write(dump_typed(typed))
    else:
        out.write(f"{args.file}: ok ({len(typed.functions)} functions)\n")
    return EXIT_OK


def cmd_compile(args, out) -> int:
    _, typed = _load(args.file)
    entry = _entry(typed, args.entry)
    script = _compile(typed, entry)
    text = print_michelson(script)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_run(args, out) -> int:
    program, typed = _load(args.file)
    fn = typed.function(_entry(typed, args.entry))
    v = _input(program, fn, args.input)
    try:
        result = eval_function(typed, fn.name, v, args.amount)
    except ContractFailure as exc:
        out.write(f"failed with {print_value(exc.payload)}\n")
        return EXIT_FAILURE
    out.write(print_value(result) + "\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    program, typed = _load(args.file)
    fn = typed.function(_entry(typed, args.entry))
    script = _compile(typed, fn.name)
    v = _input(program, fn, args.input)
    param = compile_value(v.get("param"), fn.input.get("param"))
    storage = compile_value(v.get("store"), fn.input.get("store"))
    try:
        ops, new_storage = run_contract(script, param, storage, args.amount)
    except MichFailure as exc:
        out.write(f"failed with {print_mvalue(exc.payload)}\n")
        return EXIT_FAILURE
    out.write(print_value(decode_value(Pair(ops, new_storage), fn.output)) + "\n")
    return EXIT_OK


def cmd_fuzz(args, out) -> int:
    from .fuzz.harness import campaign

    report = open(args.report, "w") if args.report else None
    try:
        res = campaign(args.seed, args.cases, args.budget, args.inputs, report)
    finally:
        if report:
            report.close()
    out.write(f"cases: {res.cases}\nruns: {res.runs}\nagreed: {res.agreed}\n")
    out.write(f"both failed (agreeing): {res.failures_both}\n")
    out.write("rhs coverage: " + ", ".join(f"{k}={n}" for k, n in res.coverage.items()) + "\n")
    for case, j, v in res.disagreements:
        out.write(f"DISAGREE seed={args.seed} case={case} input={j}\n")
        if v.error:
            out.write(f"  error: {v.error}\n")
        out.write(v.program)
    return EXIT_OK if res.all_agree else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="albertc", description="Albert to Michelson compiler")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("typecheck", help="parse and typecheck a program")
    p.add_argument("file")
    p.add_argument("--dump", action="store_true", help="print every instruction with its environments")
    p.set_defaults(func=cmd_typecheck)

    p = sub.add_parser("compile", help="compile a contract to Michelson")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--entry", help="entry function (default: the last one)")
    p.set_defaults(func=cmd_compile)

    for name, func, help_ in (
        ("run", cmd_run, "evaluate a function with the reference interpreter"),
        ("simulate", cmd_simulate, "compile, then execute on the Michelson interpreter"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        p.add_argument("--entry", help="entry function (default: the last one)")
        p.add_argument("--amount", type=_mutez, default=0, help="transferred amount in mutez")
        p.add_argument("--input", help="input record in Albert literal syntax")
        p.set_defaults(func=func)

    p = sub.add_parser("fuzz", help="differential testing on generated programs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--budget", type=int, default=40)
    p.add_argument("--inputs", type=int, default=3, help="random inputs per program")
    p.add_argument("--report", help="write one JSON line per run to this file")
    p.set_defaults(func=cmd_fuzz)
    return ap


def _mutez(s: str) -> int:
    n = int(s)
    if not 0 <= n < A.MUTEZ_BOUND:
        raise argparse.ArgumentTypeError("amount must be in [0, 2^63)")
    return n


def cli_main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UserError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USER
    except Exception as exc:  # anything else is a bug in the toolchain
        err.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
