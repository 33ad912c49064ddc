"""Albert abstract syntax: types, values, instructions and programs.

All nodes are frozen dataclasses so programs can be shared freely and compared
structurally.  Instruction and right-hand-side nodes carry an optional source
position that is ignored by equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Label = str

PRIM_KINDS = ("nat", "int", "string", "mutez", "bool", "operation")
COMPARABLE_PRIMS = ("nat", "int", "string", "mutez", "bool")
MUTEZ_BOUND = 2**63


# --------------------------------------------------------------------- types


class AlbertType:
    __slots__ = ()


@dataclass(frozen=True)
class Prim(AlbertType):
    kind: str


@dataclass(frozen=True)
class RecordTy(AlbertType):
    fields: Tuple[Tuple[Label, AlbertType], ...] = ()

    def labels(self) -> Tuple[Label, ...]:
        return tuple(l for l, _ in self.fields)

    def get(self, label: Label) -> Optional[AlbertType]:
        for l, t in self.fields:
            if l == label:
                return t
        return None


@dataclass(frozen=True)
class VariantTy(AlbertType):
    ctors: Tuple[Tuple[Label, AlbertType], ...]

    def labels(self) -> Tuple[Label, ...]:
        return tuple(c for c, _ in self.ctors)

    def get(self, ctor: Label) -> Optional[AlbertType]:
        for c, t in self.ctors:
            if c == ctor:
                return t
        return None


@dataclass(frozen=True)
class ListTy(AlbertType):
    elem: AlbertType


@dataclass(frozen=True)
class MapTy(AlbertType):
    key: AlbertType
    val: AlbertType


@dataclass(frozen=True)
class OptionTy(AlbertType):
    elem: AlbertType


@dataclass(frozen=True)
class Alias(AlbertType):
    name: Label


NAT = Prim("nat")
INT = Prim("int")
STRING = Prim("string")
MUTEZ = Prim("mutez")
BOOL = Prim("bool")
OPERATION = Prim("operation")
UNIT = RecordTy(())


def record_ty(**fields: AlbertType) -> RecordTy:
    """Sorted record type from keyword arguments (test and generator helper)."""
    return RecordTy(tuple(sorted(fields.items())))


# -------------------------------------------------------------------- values


class Value:
    __slots__ = ()


@dataclass(frozen=True)
class RecordVal(Value):
    fields: Tuple[Tuple[Label, Value], ...] = ()

    def get(self, label: Label) -> Optional[Value]:
        for l, v in self.fields:
            if l == label:
                return v
        return None


@dataclass(frozen=True)
class VariantVal(Value):
    ctor: Label
    payload: Value
    ty: AlbertType


@dataclass(frozen=True)
class NatVal(Value):
    value: int


@dataclass(frozen=True)
class IntVal(Value):
    value: int


@dataclass(frozen=True)
class MutezVal(Value):
    value: int


@dataclass(frozen=True)
class StringVal(Value):
    value: str


@dataclass(frozen=True)
class BoolVal(Value):
    value: bool


@dataclass(frozen=True)
class ListVal(Value):
    elems: Tuple[Value, ...]
    elem_ty: AlbertType


@dataclass(frozen=True)
class MapVal(Value):
    entries: Tuple[Tuple[Value, Value], ...]
    key_ty: AlbertType
    val_ty: AlbertType

    def lookup(self, key: Value) -> Optional[Value]:
        for k, v in self.entries:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class NoneVal(Value):
    elem_ty: AlbertType


@dataclass(frozen=True)
class SomeVal(Value):
    payload: Value


@dataclass(frozen=True)
class OperationVal(Value):
    descriptor: str


def record_val(**fields: Value) -> RecordVal:
    return RecordVal(tuple(sorted(fields.items())))


def compare_values(a: Value, b: Value) -> int:
    """Total order on comparable values (same type assumed)."""
    match a, b:
        case (NatVal(x), NatVal(y)) | (IntVal(x), IntVal(y)) | (MutezVal(x), MutezVal(y)):
            return (x > y) - (x < y)
        case StringVal(x), StringVal(y):
            xb, yb = x.encode(), y.encode()
            return (xb > yb) - (xb < yb)
        case BoolVal(x), BoolVal(y):
            return (x > y) - (x < y)
    raise ValueError(f"values {a!r} and {b!r} are not comparable")


def sort_key(v: Value):
    match v:
        case NatVal(x) | IntVal(x) | MutezVal(x):
            return x
        case StringVal(s):
            return s.encode()
        case BoolVal(b):
            return b
    raise ValueError(f"{v!r} is not a comparable value")


# -------------------------------------------------------------------- syntax


@dataclass(frozen=True)
class Node:
    pos: Optional[Tuple[int, int]] = field(default=None, compare=False, repr=False, kw_only=True)


# Arguments


@dataclass(frozen=True)
class Var(Node):
    name: Label


@dataclass(frozen=True)
class Val(Node):
    value: Value


@dataclass(frozen=True)
class RecordArg(Node):
    fields: Tuple[Tuple[Label, Label], ...]


Arg = Union[Var, Val, RecordArg]


# Left-hand sides (Var is shared with arguments)


@dataclass(frozen=True)
class RecordPat(Node):
    fields: Tuple[Tuple[Label, Label], ...]


Lhs = Union[Var, RecordPat]


# Right-hand sides

BUILTIN_FUNCTIONS = ("dup", "amount", "failwith", "assert_some")
BINOPS = ("add", "ge", "mapget")


@dataclass(frozen=True)
class ArgRhs(Node):
    arg: Arg


@dataclass(frozen=True)
class Apply(Node):
    func: Label
    arg: Arg


@dataclass(frozen=True)
class Proj(Node):
    var: Label
    field: Label


@dataclass(frozen=True)
class Update(Node):
    var: Label
    fields: Tuple[Tuple[Label, Label], ...]


@dataclass(frozen=True)
class MatchRhs(Node):
    scrutinee: Label
    branches: Tuple[Tuple[Label, Label, "Rhs"], ...]


@dataclass(frozen=True)
class Construct(Node):
    ctor: Label
    arg: Arg
    annot: Optional[AlbertType] = None


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Label
    right: Label


@dataclass(frozen=True)
class MapUpdate(Node):
    map: Label
    key: Label
    value: Label


Rhs = Union[ArgRhs, Apply, Proj, Update, MatchRhs, Construct, BinOp, MapUpdate]


# Instructions


@dataclass(frozen=True)
class Noop(Node):
    pass


@dataclass(frozen=True)
class Seq(Node):
    first: "Instruction"
    second: "Instruction"


@dataclass(frozen=True)
class Assign(Node):
    lhs: Lhs
    rhs: Rhs


@dataclass(frozen=True)
class Drop(Node):
    var: Label


@dataclass(frozen=True)
class MatchInstr(Node):
    scrutinee: Label
    branches: Tuple[Tuple[Label, Label, "Instruction"], ...]


@dataclass(frozen=True)
class RhsInstr(Node):
    """A bare right-hand side used as an instruction.

    The rhs must produce a record; its fields become variables of the
    environment (or the rhs fails, e.g. ``failwith``).
    """

    rhs: Rhs


Instruction = Union[Noop, Seq, Assign, Drop, MatchInstr, RhsInstr]


def seq_of(instrs) -> "Instruction":
    """Right-associated sequence of a list of instructions (Noop if empty)."""
    instrs = list(instrs)
    if not instrs:
        return Noop()
    result = instrs[-1]
    for i in reversed(instrs[:-1]):
        result = Seq(i, result)
    return result


def flatten_seq(instr: "Instruction") -> list:
    if isinstance(instr, Seq):
        return flatten_seq(instr.first) + flatten_seq(instr.second)
    return [instr]


@dataclass(frozen=True)
class FunctionDef(Node):
    name: Label
    input: AlbertType
    output: AlbertType
    body: Instruction


@dataclass(frozen=True)
class Program:
    type_aliases: Tuple[Tuple[Label, AlbertType], ...] = ()
    functions: Tuple[FunctionDef, ...] = ()

    def function(self, name: Label) -> Optional[FunctionDef]:
        for f in self.functions:
            if f.name == name:
                return f
        return None
