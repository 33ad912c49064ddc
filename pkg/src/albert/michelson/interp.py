"""Stack-machine interpreter for the Michelson subset.

Internally the stack is a Python list whose *end* is the top; the public API
uses tuples with index 0 at the top, like the stack types.
"""

from __future__ import annotations

from .core import (
    MUTEZ_BOUND,
    Bool,
    Int,
    Left,
    ListV,
    MapV,
    Mutez,
    Nat,
    NoneV,
    Pair,
    Right,
    SomeV,
    String,
    Unit,
    compare,
    key,
)
from ..errors import MichFailure

OVERFLOW_PAYLOAD = String("mutez overflow")


class _Machine:
    def __init__(self, amount: int):
        self.amount = amount

    def run(self, code, st: list) -> None:
        for instr in code:
            self.step(instr, st)

    def step(self, instr, st: list) -> None:
        op, args = instr.op, instr.args
        if op == "DIG":
            n = args[0]
            if n:
                st.append(st.pop(-1 - n))
        elif op == "DUG":
            n = args[0]
            if n:
                top = st.pop()
                st.insert(len(st) - n, top)
        elif op == "PUSH":
            st.append(args[1])
        elif op == "PAIR":
            a = st.pop()
            b = st.pop()
            st.append(Pair(a, b))
        elif op == "UNPAIR":
            p = st.pop()
            st.append(p.right)
            st.append(p.left)
        elif op == "CAR":
            st.append(st.pop().left)
        elif op == "CDR":
            st.append(st.pop().right)
        elif op == "DUP":
            st.append(st[-1])
        elif op == "DROP":
            st.pop()
        elif op == "SWAP":
            st[-1], st[-2] = st[-2], st[-1]
        elif op == "UNIT":
            st.append(Unit())
        elif op == "LEFT":
            st.append(Left(st.pop()))
        elif op == "RIGHT":
            st.append(Right(st.pop()))
        elif op == "SOME":
            st.append(SomeV(st.pop()))
        elif op == "NONE":
            st.append(NoneV())
        elif op == "NIL":
            st.append(ListV(()))
        elif op == "CONS":
            x = st.pop()
            lst = st.pop()
            st.append(ListV((x, *lst.elems)))
        elif op == "IF_LEFT":
            v = st.pop()
            if isinstance(v, Left):
                st.append(v.value)
                self.run(args[0], st)
            else:
                st.append(v.value)
                self.run(args[1], st)
        elif op == "IF":
            v = st.pop()
            self.run(args[0] if v.value else args[1], st)
        elif op == "IF_NONE":
            v = st.pop()
            if isinstance(v, NoneV):
                self.run(args[0], st)
            else:
                st.append(v.value)
                self.run(args[1], st)
        elif op == "ADD":
            a = st.pop()
            b = st.pop()
            st.append(_add(a, b))
        elif op == "COMPARE":
            a = st.pop()
            b = st.pop()
            st.append(Int(compare(a, b)))
        elif op == "GE":
            st.append(Bool(st.pop().value >= 0))
        elif op == "GET":
            k = st.pop()
            m = st.pop()
            st.append(_map_get(m, k))
        elif op == "UPDATE":
            k = st.pop()
            v = st.pop()
            m = st.pop()
            st.append(_map_update(m, k, v))
        elif op == "AMOUNT":
            st.append(Mutez(self.amount))
        elif op == "FAILWITH":
            raise MichFailure(st.pop())
        elif op == "SEQ":
            self.run(args[0], st)
        else:
            raise AssertionError(f"unsupported instruction {op}")


def _add(a, b):
    match a, b:
        case Nat(x), Nat(y):
            return Nat(x + y)
        case Mutez(x), Mutez(y):
            if x + y >= MUTEZ_BOUND:
                raise MichFailure(OVERFLOW_PAYLOAD)
            return Mutez(x + y)
        case (Int(x) | Nat(x)), (Int(y) | Nat(y)):
            return Int(x + y)
    raise AssertionError(f"ADD on {a!r}, {b!r}")


def _map_get(m: MapV, k):
    for kk, v in m.entries:
        if kk == k:
            return SomeV(v)
    return NoneV()


def _map_update(m: MapV, k, v):
    entries = [(kk, vv) for kk, vv in m.entries if kk != k]
    if isinstance(v, SomeV):
        entries.append((k, v.value))
        entries.sort(key=lambda kv: key(kv[0]))
    return MapV(tuple(entries))


def mtc_interpret(code, stack, amount: int = 0) -> tuple:
    """Run ``code`` on ``stack`` (index 0 = top); raises MichFailure on FAILWITH."""
    st = list(reversed(stack))
    _Machine(amount).run(code, st)
    return tuple(reversed(st))


def run_contract(script, parameter, storage, amount: int = 0):
    """Execute a script under the calling convention; returns (operations, storage)."""
    from .typecheck import typecheck_script

    typecheck_script(script)
    out = mtc_interpret(script.code, (Pair(parameter, storage),), amount)
    if len(out) != 1 or not isinstance(out[0], Pair):
        raise AssertionError("script violated the calling convention")
    return out[0].left, out[0].right
