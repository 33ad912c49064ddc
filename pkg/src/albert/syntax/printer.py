"""Pretty-printer for Albert programs, types and values.

Output re-parses to a structurally equal AST; literal values are printed with
enough ascriptions that the parser recovers their exact types.
"""

from __future__ import annotations

from . import ast as A
from .lexer import escape

INDENT = "  "


def print_type(t: A.AlbertType) -> str:
    match t:
        case A.Prim(kind):
            return kind
        case A.Alias(name):
            return name
        case A.RecordTy(fields):
            return "{" + "; ".join(f"{l} : {print_type(ft)}" for l, ft in fields) + "}"
        case A.VariantTy(ctors):
            return "[" + " | ".join(f"{c} : {print_type(ct)}" for c, ct in ctors) + "]"
        case A.ListTy(e):
            return f"list {_atype(e)}"
        case A.OptionTy(e):
            return f"option {_atype(e)}"
        case A.MapTy(k, v):
            return f"map {_atype(k)} {_atype(v)}"
    raise TypeError(f"not a type: {t!r}")


def _atype(t: A.AlbertType) -> str:
    s = print_type(t)
    return f"({s})" if isinstance(t, (A.ListTy, A.OptionTy, A.MapTy)) else s


def print_value(v: A.Value) -> str:
    match v:
        case A.NatVal(n):
            return str(n)
        case A.IntVal(n):
            return str(n) if n < 0 else f"({n} : int)"
        case A.MutezVal(n):
            return f"({n} : mutez)"
        case A.StringVal(s):
            return escape(s)
        case A.BoolVal(b):
            return "True" if b else "False"
        case A.RecordVal(fields):
            return "{" + "; ".join(f"{l} = {print_value(fv)}" for l, fv in fields) + "}"
        case A.VariantVal(c, payload, ty):
            return f"({c} {print_value(payload)} : {print_type(ty)})"
        case A.ListVal(elems, ety):
            return "([" + "; ".join(print_value(e) for e in elems) + f"] : list {_atype(ety)})"
        case A.MapVal(entries, kty, vty):
            body = "; ".join(f"Elt {print_value(k)} {print_value(x)}" for k, x in entries)
            return "({" + body + f"}} : map {_atype(kty)} {_atype(vty)})"
        case A.NoneVal(ety):
            return f"(None : option {_atype(ety)})"
        case A.SomeVal(payload):
            return f"(Some {print_value(payload)})"
        case A.OperationVal(descr):
            return f"<operation {descr}>"
    raise TypeError(f"not a value: {v!r}")


def _pairs(fields, sep: str = " = ") -> str:
    return "{" + "; ".join(f"{a}{sep}{b}" for a, b in fields) + "}"


def print_arg(a: A.Arg) -> str:
    match a:
        case A.Var(name):
            return name
        case A.RecordArg(fields):
            return _pairs(fields)
        case A.Val(A.RecordVal(())):
            return "({} : {})"
        case A.Val(v):
            return print_value(v)
    raise TypeError(f"not an argument: {a!r}")


def print_rhs(r: A.Rhs) -> str:
    match r:
        case A.ArgRhs(a):
            return print_arg(a)
        case A.Apply("amount", A.RecordArg(())):
            return "amount"
        case A.Apply(f, a):
            return f"{f} {print_arg(a)}"
        case A.Proj(x, l):
            return f"{x}.{l}"
        case A.Update(x, fields):
            return "{" + x + " with " + "; ".join(f"{l} = {y}" for l, y in fields) + "}"
        case A.MatchRhs(x, branches):
            arms = " ".join(f"| {c} {b} -> {print_rhs(body)}" for c, b, body in branches)
            return f"match {x} with {arms} end"
        case A.Construct(c, a, annot):
            s = f"{c} {print_arg(a)}"
            return s if annot is None else f"{s} : {print_type(annot)}"
        case A.BinOp("add", x, y):
            return f"{x} + {y}"
        case A.BinOp("ge", x, y):
            return f"{x} >= {y}"
        case A.BinOp("mapget", m, k):
            return f"{m}[{k}]"
        case A.MapUpdate(m, k, v):
            return f"update {m} {k} {v}"
    raise TypeError(f"not a right-hand side: {r!r}")


def print_lhs(l: A.Lhs) -> str:
    if isinstance(l, A.Var):
        return l.name
    return _pairs(l.fields)


def _instr_lines(i: A.Instruction, depth: int) -> list[str]:
    """Lines of one non-sequence instruction; the first line is unindented."""
    pad = INDENT * depth
    match i:
        case A.Noop():
            return ["noop"]
        case A.Drop(x):
            return [f"drop {x}"]
        case A.Assign(lhs, rhs):
            return [f"{print_lhs(lhs)} = {print_rhs(rhs)}"]
        case A.RhsInstr(rhs):
            return [print_rhs(rhs)]
        case A.MatchInstr(x, branches):
            lines = [f"match {x} with"]
            for c, b, body in branches:
                items = A.flatten_seq(body)
                if len(items) == 1 and not isinstance(items[0], A.MatchInstr):
                    lines.append(f"{pad}| {c} {b} -> {_instr_lines(items[0], depth + 2)[0]}")
                else:
                    lines.append(f"{pad}| {c} {b} ->")
                    inner = INDENT * (depth + 2)
                    lines.extend(inner + ln for ln in _seq_lines(body, depth + 2))
            lines.append(f"{pad}end")
            return lines
    raise TypeError(f"not an instruction: {i!r}")


def _seq_lines(body: A.Instruction, depth: int) -> list[str]:
    """Lines of a sequence, relative to the sequence's own indentation."""
    items = A.flatten_seq(body)
    out: list[str] = []
    for n, item in enumerate(items):
        lines = _instr_lines(item, depth)
        lines = [lines[0]] + [ln[len(INDENT * depth):] for ln in lines[1:]]
        if n < len(items) - 1:
            lines[-1] += ";"
        out.extend(lines)
    return out


def print_instruction(i: A.Instruction, depth: int = 0) -> str:
    return "\n".join((INDENT * depth) + ln for ln in _seq_lines(i, depth))


def print_albert(p: A.Program) -> str:
    """Render a program; ``parse_program(print_albert(p)) == p``."""
    chunks = [f"type {name} = {print_type(t)}" for name, t in p.type_aliases]
    for f in p.functions:
        head = f"def {f.name} : {print_type(f.input)} -> {print_type(f.output)} ="
        chunks.append(head + "\n" + print_instruction(f.body, 1))
    return "\n\n".join(chunks) + "\n" if chunks else ""
