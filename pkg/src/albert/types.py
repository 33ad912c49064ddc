"""Type algebra: alias inlining, lexicographic normalization, well-formedness,
equality and the partial join of record environments."""

from __future__ import annotations

from dataclasses import replace

from .errors import AlbertTypeError, JoinError, TypeErrorKind
from .syntax import ast as A

RecordEnv = A.RecordTy


# ------------------------------------------------------------------ aliases


def expand_aliases(t: A.AlbertType, table: dict, _stack: tuple = ()) -> A.AlbertType:
    """Replace every alias in ``t`` by its definition, recursively."""
    match t:
        case A.Alias(name):
            if name in _stack:
                cycle = " -> ".join((*_stack[_stack.index(name):], name))
                raise AlbertTypeError(TypeErrorKind.TypeMismatch, f"recursive type alias: {cycle}")
            if name not in table:
                raise AlbertTypeError(TypeErrorKind.TypeMismatch, f"unknown type alias {name!r}")
            return expand_aliases(table[name], table, (*_stack, name))
        case A.RecordTy(fields):
            return A.RecordTy(tuple((l, expand_aliases(ft, table, _stack)) for l, ft in fields))
        case A.VariantTy(ctors):
            return A.VariantTy(tuple((c, expand_aliases(ct, table, _stack)) for c, ct in ctors))
        case A.ListTy(e):
            return A.ListTy(expand_aliases(e, table, _stack))
        case A.OptionTy(e):
            return A.OptionTy(expand_aliases(e, table, _stack))
        case A.MapTy(k, v):
            return A.MapTy(expand_aliases(k, table, _stack), expand_aliases(v, table, _stack))
    return t


def inline_aliases(p: A.Program) -> A.Program:
    """Program with every alias replaced by its definition and no alias table."""
    table = dict(p.type_aliases)
    # check every declared alias, even unused ones, for cycles and dangling names
    for name, _ in p.type_aliases:
        expand_aliases(A.Alias(name), table)
    out = map_program_types(p, lambda t: expand_aliases(t, table))
    return replace(out, type_aliases=())


# ------------------------------------------------------------ normalization


def normalize_type(t: A.AlbertType) -> A.AlbertType:
    """Sort record fields and variant constructors at every depth (idempotent)."""
    match t:
        case A.RecordTy(fields):
            return A.RecordTy(tuple(sorted(((l, normalize_type(ft)) for l, ft in fields), key=_label_key)))
        case A.VariantTy(ctors):
            return A.VariantTy(tuple(sorted(((c, normalize_type(ct)) for c, ct in ctors), key=_label_key)))
        case A.ListTy(e):
            return A.ListTy(normalize_type(e))
        case A.OptionTy(e):
            return A.OptionTy(normalize_type(e))
        case A.MapTy(k, v):
            return A.MapTy(normalize_type(k), normalize_type(v))
    return t


def _label_key(item):
    return item[0].encode()


def label_lt(a: str, b: str) -> bool:
    return a.encode() < b.encode()


def normalize_program(p: A.Program) -> A.Program:
    return map_program_types(p, normalize_type)


def prepare_program(p: A.Program) -> A.Program:
    """Alias inlining followed by normalization: the typer's expected input."""
    return normalize_program(inline_aliases(p))


# ---------------------------------------------------------- well-formedness


def well_formed(t: A.AlbertType, path: str = "") -> None:
    """Raise AlbertTypeError (with the offending path) unless ``t`` is well formed."""
    where = path or "<type>"
    match t:
        case A.Prim(kind):
            if kind not in A.PRIM_KINDS:
                raise _wf(f"{where}: unsupported primitive type {kind!r}")
        case A.RecordTy(fields) | A.VariantTy(fields):
            if isinstance(t, A.VariantTy) and not fields:
                raise _wf(f"{where}: variant types need at least one constructor")
            for (a, _), (b, _) in zip(fields, fields[1:]):
                if not label_lt(a, b):
                    raise _wf(f"{where}: labels {a!r} and {b!r} are not distinct and increasing")
            for l, ft in fields:
                well_formed(ft, f"{path}.{l}" if path else l)
        case A.ListTy(e):
            well_formed(e, f"{where}[elem]")
        case A.OptionTy(e):
            well_formed(e, f"{where}[option]")
        case A.MapTy(k, v):
            if not (isinstance(k, A.Prim) and k.kind in A.COMPARABLE_PRIMS):
                raise _wf(f"{where}: map keys must be a comparable primitive type")
            well_formed(v, f"{where}[value]")
            if contains_operation(v):
                raise _wf(f"{where}: map values may not contain operations")
        case A.Alias(name):
            raise _wf(f"{where}: alias {name!r} was not inlined")
        case _:
            raise _wf(f"{where}: not a type: {t!r}")


def _wf(msg: str) -> AlbertTypeError:
    return AlbertTypeError(TypeErrorKind.TypeMismatch, f"ill-formed type: {msg}")


def is_well_formed(t: A.AlbertType) -> bool:
    try:
        well_formed(t)
    except AlbertTypeError:
        return False
    return True


def contains_operation(t: A.AlbertType) -> bool:
    match t:
        case A.Prim("operation"):
            return True
        case A.RecordTy(fields) | A.VariantTy(fields):
            return any(contains_operation(ft) for _, ft in fields)
        case A.ListTy(e) | A.OptionTy(e):
            return contains_operation(e)
        case A.MapTy(k, v):
            return contains_operation(k) or contains_operation(v)
    return False


def type_equal(a: A.AlbertType, b: A.AlbertType) -> bool:
    """Type equality on alias-free normalized types: plain structural equality."""
    return a == b


# --------------------------------------------------------------------- join


def join(a: RecordEnv, b: RecordEnv) -> RecordEnv:
    """Disjoint union of two record types; JoinError on a shared label."""
    if not b.fields:
        return a
    if not a.fields:
        return b
    out = []
    i = j = 0
    fa, fb = a.fields, b.fields
    while i < len(fa) and j < len(fb):
        la, lb = fa[i][0], fb[j][0]
        if la == lb:
            raise JoinError(la)
        if label_lt(la, lb):
            out.append(fa[i])
            i += 1
        else:
            out.append(fb[j])
            j += 1
    out.extend(fa[i:])
    out.extend(fb[j:])
    return A.RecordTy(tuple(out))


def split(env: RecordEnv, labels) -> tuple[RecordEnv, RecordEnv]:
    """Inverse of join: (the bindings named by ``labels``, the remainder)."""
    wanted = set(labels)
    taken = tuple(f for f in env.fields if f[0] in wanted)
    rest = tuple(f for f in env.fields if f[0] not in wanted)
    return A.RecordTy(taken), A.RecordTy(rest)


def env_of(bindings) -> RecordEnv:
    return A.RecordTy(tuple(sorted(bindings, key=_label_key)))


# ------------------------------------------------------------------- values


def value_type(v: A.Value) -> A.AlbertType:
    """The type a literal value carries on its face."""
    match v:
        case A.NatVal():
            return A.NAT
        case A.IntVal():
            return A.INT
        case A.MutezVal():
            return A.MUTEZ
        case A.StringVal():
            return A.STRING
        case A.BoolVal():
            return A.BOOL
        case A.OperationVal():
            return A.OPERATION
        case A.RecordVal(fields):
            return A.RecordTy(tuple((l, value_type(fv)) for l, fv in fields))
        case A.VariantVal(_, _, ty):
            return ty
        case A.ListVal(_, ety):
            return A.ListTy(ety)
        case A.MapVal(_, kty, vty):
            return A.MapTy(kty, vty)
        case A.NoneVal(ety):
            return A.OptionTy(ety)
        case A.SomeVal(payload):
            return A.OptionTy(value_type(payload))
    raise TypeError(f"not a value: {v!r}")


def check_value(v: A.Value, t: A.AlbertType) -> bool:
    """Whether ``v`` inhabits the normalized type ``t`` (including invariants)."""
    match t, v:
        case A.Prim("nat"), A.NatVal(n):
            return n >= 0
        case A.Prim("int"), A.IntVal():
            return True
        case A.Prim("mutez"), A.MutezVal(n):
            return 0 <= n < A.MUTEZ_BOUND
        case A.Prim("string"), A.StringVal():
            return True
        case A.Prim("bool"), A.BoolVal():
            return True
        case A.Prim("operation"), A.OperationVal():
            return True
        case A.RecordTy(tf), A.RecordVal(vf):
            return len(tf) == len(vf) and all(
                tl == vl and check_value(fv, ft) for (tl, ft), (vl, fv) in zip(tf, vf)
            )
        case A.VariantTy(), A.VariantVal(c, payload, vt):
            pt = t.get(c)
            return pt is not None and normalize_type(vt) == t and check_value(payload, pt)
        case A.ListTy(e), A.ListVal(elems, ety):
            return normalize_type(ety) == e and all(check_value(x, e) for x in elems)
        case A.MapTy(kt, vt), A.MapVal(entries, kty, vty):
            if normalize_type(kty) != kt or normalize_type(vty) != vt:
                return False
            keys = [k for k, _ in entries]
            return (
                all(check_value(k, kt) and check_value(x, vt) for k, x in entries)
                and all(A.compare_values(a, b) < 0 for a, b in zip(keys, keys[1:]))
            )
        case A.OptionTy(e), A.NoneVal(ety):
            return normalize_type(ety) == e
        case A.OptionTy(e), A.SomeVal(payload):
            return check_value(payload, e)
    return False


def map_value_types(v: A.Value, fn) -> A.Value:
    match v:
        case A.RecordVal(fields):
            return A.RecordVal(tuple((l, map_value_types(fv, fn)) for l, fv in fields))
        case A.VariantVal(c, payload, ty):
            return A.VariantVal(c, map_value_types(payload, fn), fn(ty))
        case A.ListVal(elems, ety):
            return A.ListVal(tuple(map_value_types(e, fn) for e in elems), fn(ety))
        case A.MapVal(entries, kty, vty):
            return A.MapVal(
                tuple((map_value_types(k, fn), map_value_types(x, fn)) for k, x in entries), fn(kty), fn(vty)
            )
        case A.NoneVal(ety):
            return A.NoneVal(fn(ety))
        case A.SomeVal(payload):
            return A.SomeVal(map_value_types(payload, fn))
    return v


# ---------------------------------------------------------- program walker


def map_program_types(p: A.Program, fn) -> A.Program:
    """Apply ``fn`` to every type occurring in ``p`` (signatures, annotations,
    literal values)."""

    def arg(a):
        if isinstance(a, A.Val):
            return replace(a, value=map_value_types(a.value, fn))
        return a

    def rhs(r):
        match r:
            case A.ArgRhs(a):
                return replace(r, arg=arg(a))
            case A.Apply(_, a):
                return replace(r, arg=arg(a))
            case A.Construct(_, a, annot):
                return replace(r, arg=arg(a), annot=fn(annot) if annot is not None else None)
            case A.MatchRhs(_, branches):
                return replace(r, branches=tuple((c, x, rhs(b)) for c, x, b in branches))
        return r

    def instr(i):
        match i:
            case A.Seq(a, b):
                return replace(i, first=instr(a), second=instr(b))
            case A.Assign(_, r):
                return replace(i, rhs=rhs(r))
            case A.RhsInstr(r):
                return replace(i, rhs=rhs(r))
            case A.MatchInstr(_, branches):
                return replace(i, branches=tuple((c, x, instr(b)) for c, x, b in branches))
        return i

    aliases = tuple((n, fn(t)) for n, t in p.type_aliases)
    functions = tuple(
        replace(f, input=fn(f.input), output=fn(f.output), body=instr(f.body)) for f in p.functions
    )
    return A.Program(aliases, functions)


def variant_view(t: A.AlbertType) -> A.VariantTy | None:
    """bool and option seen as the variants they abbreviate; None otherwise."""
    match t:
        case A.VariantTy():
            return t
        case A.Prim("bool"):
            return A.VariantTy((("False", A.UNIT), ("True", A.UNIT)))
        case A.OptionTy(e):
            return A.VariantTy((("None", A.UNIT), ("Some", e)))
    return None
