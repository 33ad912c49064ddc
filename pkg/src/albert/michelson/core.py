"""Michelson subset: types, values and instructions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

MUTEZ_BOUND = 2**63

LEAF_TYPES = ("unit", "nat", "int", "string", "mutez", "bool", "operation")
COMPARABLE = ("nat", "int", "string", "mutez", "bool")
_ARITY = {"pair": 2, "or": 2, "option": 1, "list": 1, "map": 2}


@dataclass(frozen=True)
class MType:
    name: str
    args: Tuple["MType", ...] = ()

    def __post_init__(self):
        want = _ARITY.get(self.name, 0)
        if self.name not in LEAF_TYPES and self.name not in _ARITY:
            raise ValueError(f"unknown Michelson type {self.name}")
        if len(self.args) != want:
            raise ValueError(f"{self.name} takes {want} type arguments")
        if self.name == "map" and self.args[0].name not in COMPARABLE:
            raise ValueError("map keys must be comparable")

    def __str__(self) -> str:
        from .printer import print_mtype

        return print_mtype(self)


T_UNIT = MType("unit")
T_NAT = MType("nat")
T_INT = MType("int")
T_STRING = MType("string")
T_MUTEZ = MType("mutez")
T_BOOL = MType("bool")
T_OPERATION = MType("operation")


def pair(a: MType, b: MType) -> MType:
    return MType("pair", (a, b))


def or_(a: MType, b: MType) -> MType:
    return MType("or", (a, b))


def option(a: MType) -> MType:
    return MType("option", (a,))


def list_(a: MType) -> MType:
    return MType("list", (a,))


def map_(k: MType, v: MType) -> MType:
    return MType("map", (k, v))


def pushable(t: MType) -> bool:
    return t.name != "operation" and all(pushable(a) for a in t.args)


# ------------------------------------------------------------------- values


class MValue:
    __slots__ = ()


@dataclass(frozen=True)
class Unit(MValue):
    pass


@dataclass(frozen=True)
class Nat(MValue):
    value: int


@dataclass(frozen=True)
class Int(MValue):
    value: int


@dataclass(frozen=True)
class Mutez(MValue):
    value: int


@dataclass(frozen=True)
class String(MValue):
    value: str


@dataclass(frozen=True)
class Bool(MValue):
    value: bool


@dataclass(frozen=True)
class Pair(MValue):
    left: MValue
    right: MValue


@dataclass(frozen=True)
class Left(MValue):
    value: MValue


@dataclass(frozen=True)
class Right(MValue):
    value: MValue


@dataclass(frozen=True)
class SomeV(MValue):
    value: MValue


@dataclass(frozen=True)
class NoneV(MValue):
    pass


@dataclass(frozen=True)
class ListV(MValue):
    elems: Tuple[MValue, ...] = ()


@dataclass(frozen=True)
class MapV(MValue):
    entries: Tuple[Tuple[MValue, MValue], ...] = ()


@dataclass(frozen=True)
class OperationV(MValue):
    descriptor: str


def key(v: MValue):
    """Sort key implementing Michelson's order on comparable values."""
    match v:
        case Nat(n) | Int(n) | Mutez(n):
            return n
        case String(s):
            return s.encode()
        case Bool(b):
            return b
    raise ValueError(f"{v!r} is not comparable")


def compare(a: MValue, b: MValue) -> int:
    ka, kb = key(a), key(b)
    return (ka > kb) - (ka < kb)


def make_map(entries) -> MapV:
    """MapV with entries sorted by key; later duplicates win."""
    d = {}
    for k, v in entries:
        d[k] = v
    return MapV(tuple(sorted(d.items(), key=lambda kv: key(kv[0]))))


def typecheck_value(v: MValue, t: MType) -> bool:
    match t.name, v:
        case "unit", Unit():
            return True
        case "nat", Nat(n):
            return n >= 0
        case "int", Int():
            return True
        case "mutez", Mutez(n):
            return 0 <= n < MUTEZ_BOUND
        case "string", String():
            return True
        case "bool", Bool():
            return True
        case "operation", OperationV():
            return True
        case "pair", Pair(a, b):
            return typecheck_value(a, t.args[0]) and typecheck_value(b, t.args[1])
        case "or", Left(x):
            return typecheck_value(x, t.args[0])
        case "or", Right(x):
            return typecheck_value(x, t.args[1])
        case "option", NoneV():
            return True
        case "option", SomeV(x):
            return typecheck_value(x, t.args[0])
        case "list", ListV(elems):
            return all(typecheck_value(e, t.args[0]) for e in elems)
        case "map", MapV(entries):
            keys = [k for k, _ in entries]
            return all(
                typecheck_value(k, t.args[0]) and typecheck_value(x, t.args[1]) for k, x in entries
            ) and all(compare(a, b) < 0 for a, b in zip(keys, keys[1:]))
    return False


# ------------------------------------------------------------- instructions

# argument shapes: n -> int depth; t -> MType; v -> MValue; b -> branch sequence
SIGNATURES = {
    "PUSH": "tv",
    "UNIT": "",
    "PAIR": "",
    "CAR": "",
    "CDR": "",
    "UNPAIR": "",
    "DUP": "",
    "DROP": "",
    "SWAP": "",
    "DIG": "n",
    "DUG": "n",
    "LEFT": "t",
    "RIGHT": "t",
    "IF_LEFT": "bb",
    "IF": "bb",
    "IF_NONE": "bb",
    "SOME": "",
    "NONE": "t",
    "NIL": "t",
    "CONS": "",
    "ADD": "",
    "COMPARE": "",
    "GE": "",
    "GET": "",
    "UPDATE": "",
    "AMOUNT": "",
    "FAILWITH": "",
    "SEQ": "b",
}


@dataclass(frozen=True)
class Instr:
    op: str
    args: tuple = ()

    def __post_init__(self):
        sig = SIGNATURES.get(self.op)
        if sig is None:
            raise ValueError(f"unknown instruction {self.op}")
        if len(sig) != len(self.args):
            raise ValueError(f"{self.op} takes {len(sig)} arguments")
        for kind, a in zip(sig, self.args):
            if not _ARG_OK[kind](a):
                raise ValueError(f"bad argument {a!r} for {self.op}")


_ARG_OK = {
    "n": lambda x: isinstance(x, int) and x >= 0,
    "t": lambda x: isinstance(x, MType),
    "v": lambda x: isinstance(x, MValue),
    "b": lambda x: isinstance(x, tuple) and all(isinstance(i, Instr) for i in x),
}


def I(op: str, *args) -> Instr:
    """Instruction constructor; branch arguments may be given as lists."""
    return Instr(op, tuple(tuple(a) if isinstance(a, list) else a for a in args))


@dataclass(frozen=True)
class Script:
    parameter: MType
    storage: MType
    code: Tuple[Instr, ...]
