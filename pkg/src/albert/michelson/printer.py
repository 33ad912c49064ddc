"""Concrete Michelson syntax for types, values, instructions and scripts."""

from __future__ import annotations

from .core import (
    Bool,
    Instr,
    Int,
    Left,
    ListV,
    MapV,
    Mutez,
    MType,
    Nat,
    NoneV,
    OperationV,
    Pair,
    Right,
    Script,
    SomeV,
    String,
    Unit,
)

# sequences that fit on one line are printed flat
LINE_WIDTH = 72
INDENT = "  "


def print_mtype(t: MType, nested: bool = False) -> str:
    if not t.args:
        return t.name
    s = " ".join([t.name, *(print_mtype(a, True) for a in t.args)])
    return f"({s})" if nested else s


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_mvalue(v, nested: bool = False) -> str:
    def wrap(s):
        return f"({s})" if nested else s

    match v:
        case Unit():
            return "Unit"
        case Nat(n) | Mutez(n):
            return str(n)
        case Int(n):
            return str(n)
        case String(s):
            return _quote(s)
        case Bool(b):
            return "True" if b else "False"
        case Pair(a, b):
            return wrap(f"Pair {print_mvalue(a, True)} {print_mvalue(b, True)}")
        case Left(x):
            return wrap(f"Left {print_mvalue(x, True)}")
        case Right(x):
            return wrap(f"Right {print_mvalue(x, True)}")
        case SomeV(x):
            return wrap(f"Some {print_mvalue(x, True)}")
        case NoneV():
            return "None"
        case ListV(elems):
            return "{ " + " ; ".join(print_mvalue(e) for e in elems) + " }" if elems else "{}"
        case MapV(entries):
            if not entries:
                return "{}"
            items = (f"Elt {print_mvalue(k, True)} {print_mvalue(x, True)}" for k, x in entries)
            return "{ " + " ; ".join(items) + " }"
        case OperationV(d):
            return f"<operation {d}>"
    raise TypeError(f"not a Michelson value: {v!r}")


def _flat(instr: Instr) -> str:
    parts = [instr.op]
    for a in instr.args:
        match a:
            case int():
                parts.append(str(a))
            case MType():
                parts.append(print_mtype(a, True))
            case tuple():
                parts.append(_flat_seq(a))
            case _:
                parts.append(print_mvalue(a, True))
    if instr.op == "SEQ":
        return parts[1]
    return " ".join(parts)


def _flat_seq(code) -> str:
    if not code:
        return "{}"
    return "{ " + " ; ".join(_flat(i) for i in code) + " }"


def _lines(instr: Instr, depth: int) -> list[str]:
    pad = INDENT * depth
    flat = _flat(instr)
    branches = [a for a in instr.args if isinstance(a, tuple)]
    if not branches or len(pad) + len(flat) <= LINE_WIDTH:
        return [pad + flat]
    if instr.op == "SEQ":
        return _seq_lines(instr.args[0], depth)
    out = [pad + instr.op]
    for b in branches:
        out.extend(_seq_lines(b, depth + 1))
    return out


def _seq_lines(code, depth: int) -> list[str]:
    pad = INDENT * depth
    flat = _flat_seq(code)
    if len(pad) + len(flat) <= LINE_WIDTH:
        return [pad + flat]
    body = []
    for k, instr in enumerate(code):
        lines = _lines(instr, depth + 1)
        if k < len(code) - 1:
            lines[-1] += " ;"
        body.extend(lines)
    return [pad + "{", *body, pad + "}"]


def print_code(code, depth: int = 0) -> str:
    return "\n".join(_seq_lines(tuple(code), depth))


def print_michelson(script: Script) -> str:
    code = print_code(script.code, 0)
    if "\n" in code:
        # the opening brace goes on the `code` line, body stays indented
        lines = code.split("\n")
        code = "{\n" + "\n".join(lines[1:])
    return (
        f"parameter {print_mtype(script.parameter)};\n"
        f"storage {print_mtype(script.storage)};\n"
        f"code {code};\n"
    )
