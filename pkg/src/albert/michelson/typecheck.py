"""Stack typechecker for the Michelson subset.

Stack types are tuples of MType with index 0 at the top.  ``FAILED`` is the
type of a stack after FAILWITH; it unifies with any stack at branch joins.
"""

from __future__ import annotations

from .core import (
    COMPARABLE,
    T_BOOL,
    T_INT,
    T_MUTEZ,
    T_NAT,
    T_UNIT,
    Instr,
    MType,
    list_,
    option,
    or_,
    pair,
    pushable,
    typecheck_value,
)
from ..errors import MichTypeError


class _Failed:
    def __repr__(self):
        return "FAILED"


FAILED = _Failed()

_ADD = {
    ("nat", "nat"): T_NAT,
    ("int", "int"): T_INT,
    ("nat", "int"): T_INT,
    ("int", "nat"): T_INT,
    ("mutez", "mutez"): T_MUTEZ,
}


def _show(stack) -> str:
    if stack is FAILED:
        return "FAILED"
    return "[" + " : ".join(str(t) for t in stack) + "]"


def _need(stack, n: int, index: int, op: str):
    if len(stack) < n:
        raise MichTypeError(index, f"{op} needs {n} stack elements, got {_show(stack)}")


def typecheck_instr(instr: Instr, stack: tuple, index: int = 0):
    """Output stack type of one instruction (FAILED after FAILWITH)."""
    op, args = instr.op, instr.args
    s = stack

    def bad(msg):
        return MichTypeError(index, f"{op}: {msg}; stack is {_show(s)}")

    match op:
        case "SEQ":
            return typecheck_seq(args[0], s, index)
        case "PUSH":
            t, v = args
            if not pushable(t):
                raise bad(f"type {t} cannot be pushed")
            if not typecheck_value(v, t):
                raise bad(f"value {v!r} does not have type {t}")
            return (t, *s)
        case "UNIT":
            return (T_UNIT, *s)
        case "AMOUNT":
            return (T_MUTEZ, *s)
        case "NONE":
            return (option(args[0]), *s)
        case "NIL":
            return (list_(args[0]), *s)
        case "DIG":
            n = args[0]
            _need(s, n + 1, index, op)
            return (s[n], *s[:n], *s[n + 1:])
        case "DUG":
            n = args[0]
            _need(s, n + 1, index, op)
            return (*s[1:n + 1], s[0], *s[n + 1:])
    _need(s, {"PAIR": 2, "SWAP": 2, "CONS": 2, "ADD": 2, "COMPARE": 2, "GET": 2, "UPDATE": 3}.get(op, 1), index, op)
    top = s[0]
    match op:
        case "PAIR":
            return (pair(s[0], s[1]), *s[2:])
        case "CAR" | "CDR" | "UNPAIR":
            if top.name != "pair":
                raise bad("expected a pair on top")
            a, b = top.args
            if op == "CAR":
                return (a, *s[1:])
            if op == "CDR":
                return (b, *s[1:])
            return (a, b, *s[1:])
        case "DUP":
            return (top, *s)
        case "DROP":
            return s[1:]
        case "SWAP":
            return (s[1], s[0], *s[2:])
        case "LEFT":
            return (or_(top, args[0]), *s[1:])
        case "RIGHT":
            return (or_(args[0], top), *s[1:])
        case "SOME":
            return (option(top), *s[1:])
        case "CONS":
            if s[1] != list_(top):
                raise bad("expected 'a : list 'a")
            return s[1:]
        case "ADD":
            out = _ADD.get((top.name, s[1].name))
            if out is None:
                raise bad(f"cannot add {top} and {s[1]}")
            return (out, *s[2:])
        case "COMPARE":
            if top != s[1] or top.name not in COMPARABLE:
                raise bad("COMPARE needs two equal comparable types")
            return (T_INT, *s[2:])
        case "GE":
            if top != T_INT:
                raise bad("expected int")
            return (T_BOOL, *s[1:])
        case "GET":
            m = s[1]
            if m.name != "map" or m.args[0] != top:
                raise bad("expected 'k : map 'k 'v")
            return (option(m.args[1]), *s[2:])
        case "UPDATE":
            m = s[2]
            if m.name != "map" or m.args[0] != top or s[1] != option(m.args[1]):
                raise bad("expected 'k : option 'v : map 'k 'v")
            return (m, *s[3:])
        case "FAILWITH":
            if not pushable(top):
                raise bad("cannot fail with a non-packable value")
            return FAILED
        case "IF_LEFT":
            if top.name != "or":
                raise bad("expected an or on top")
            l, r = top.args
            return _join(
                typecheck_seq(args[0], (l, *s[1:]), index),
                typecheck_seq(args[1], (r, *s[1:]), index),
                index,
                op,
            )
        case "IF":
            if top != T_BOOL:
                raise bad("expected a bool on top")
            return _join(
                typecheck_seq(args[0], s[1:], index), typecheck_seq(args[1], s[1:], index), index, op
            )
        case "IF_NONE":
            if top.name != "option":
                raise bad("expected an option on top")
            return _join(
                typecheck_seq(args[0], s[1:], index),
                typecheck_seq(args[1], (top.args[0], *s[1:]), index),
                index,
                op,
            )
    raise bad("unsupported instruction")


def _join(a, b, index, op):
    if a is FAILED:
        return b
    if b is FAILED:
        return a
    if a != b:
        raise MichTypeError(index, f"{op}: branches end in different stacks {_show(a)} and {_show(b)}")
    return a


def typecheck_seq(code, stack, base: int = 0):
    s = tuple(stack)
    for k, instr in enumerate(code):
        if s is FAILED:
            raise MichTypeError(base + k, f"{instr.op} follows FAILWITH")
        s = typecheck_instr(instr, s, base + k)
    return s


def mtc_typecheck(code, input_stack):
    """Unique output stack type of ``code`` from ``input_stack`` (or FAILED)."""
    return typecheck_seq(tuple(code), tuple(input_stack), 0)


def typecheck_script(script) -> None:
    """Check the contract calling convention on a script."""
    want = (pair(list_(MType("operation")), script.storage),)
    out = mtc_typecheck(script.code, (pair(script.parameter, script.storage),))
    if out is not FAILED and tuple(out) != want:
        raise MichTypeError(len(script.code), f"script ends with {_show(out)}, expected {_show(want)}")
    return out
