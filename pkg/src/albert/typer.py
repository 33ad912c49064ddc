"""Linear typechecker.

Every instruction is checked against the environment it runs in and annotated
with its input and output environments.  Framing is algorithmic: each form
takes exactly the variables it reads out of the environment and threads the
rest through unchanged.  A failing instruction (``failwith``) has no output
environment (``env_out is None``); it unifies with any sibling branch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import types as T
from .errors import AlbertTypeError, JoinError, TypeErrorKind as K
from .syntax import ast as A
from .syntax.printer import print_instruction, print_rhs, print_type

RecordEnv = A.RecordTy


@dataclass(frozen=True)
class TypedRhs:
    node: A.Rhs
    consumed: RecordEnv
    ty: Optional[A.AlbertType]  # None: the rhs always fails
    branches: tuple = ()  # MatchRhs only, aligned with node.branches
    scrut_ty: Optional[A.AlbertType] = None


@dataclass(frozen=True)
class TypedInstr:
    node: A.Instruction
    env_in: RecordEnv
    env_out: Optional[RecordEnv]  # None: the instruction always fails
    children: tuple = ()  # Seq: (first, second); MatchInstr: one body per branch
    rhs: Optional[TypedRhs] = None
    scrut_ty: Optional[A.AlbertType] = None


@dataclass(frozen=True)
class TypedFunction:
    name: str
    input: RecordEnv
    output: RecordEnv
    body: TypedInstr


@dataclass(frozen=True)
class TypedProgram:
    functions: tuple

    def function(self, name: str) -> TypedFunction:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.functions]


def _err(kind: K, detail: str, node=None) -> AlbertTypeError:
    return AlbertTypeError(kind, detail, getattr(node, "pos", None))


def _show_env(env: Optional[RecordEnv]) -> str:
    return "<failed>" if env is None else print_type(env)


# ------------------------------------------------------------------- checks


def check_exhaustive(t: A.VariantTy, branches) -> None:
    """Branch labels must cover the constructors exactly once each."""
    seen: set = set()
    for c in branches:
        if c in seen:
            raise AlbertTypeError(K.DuplicateBranch, f"constructor {c} matched twice")
        seen.add(c)
    known = set(t.labels())
    unknown = [c for c in branches if c not in known]
    if unknown:
        raise AlbertTypeError(K.UnknownConstructor, f"{unknown[0]} is not a constructor of {print_type(t)}")
    missing = [c for c in t.labels() if c not in seen]
    if missing:
        raise AlbertTypeError(K.NonExhaustiveMatch, "missing constructors: " + ", ".join(missing))


def typecheck_lhs(t: A.AlbertType, lhs: A.Lhs) -> RecordEnv:
    if isinstance(lhs, A.Var):
        return A.RecordTy(((lhs.name, t),))
    if not isinstance(t, A.RecordTy):
        raise _err(K.TypeMismatch, f"record pattern against non-record type {print_type(t)}", lhs)
    want = set(t.labels())
    have = [l for l, _ in lhs.fields]
    if set(have) != want or len(have) != len(want):
        missing = sorted(want - set(have))
        extra = sorted(set(have) - want)
        detail = f"pattern labels {have} do not cover {print_type(t)}"
        if missing:
            detail += f" (missing {', '.join(missing)})"
        if extra:
            detail += f" (unknown {', '.join(extra)})"
        raise _err(K.TypeMismatch, detail, lhs)
    names = [x for _, x in lhs.fields]
    if len(set(names)) != len(names):
        raise _err(K.VariableAlreadyBound, "variable bound twice in record pattern", lhs)
    return T.env_of((x, t.get(l)) for l, x in lhs.fields)


# ------------------------------------------------------------------ checker


class _Taker:
    """Linear view of an environment: each variable can be taken once."""

    def __init__(self, env: RecordEnv, history=frozenset()):
        self.avail = dict(env.fields)
        self.taken: dict = {}
        self.history = history

    def take(self, name: str, node=None) -> A.AlbertType:
        if name not in self.avail:
            if name in self.taken or name in self.history:
                raise _err(K.UnboundVariable, f"variable {name} already consumed (linear: used twice)", node)
            raise _err(K.UnboundVariable, f"variable {name} is not bound", node)
        t = self.avail.pop(name)
        self.taken[name] = t
        return t

    def consumed(self) -> RecordEnv:
        return T.env_of(self.taken.items())


_ARITH = (A.NAT, A.INT, A.MUTEZ)


class Typer:
    def __init__(self):
        self.functions: dict[str, TypedFunction] = {}
        # every name bound so far in the current function, for diagnostics
        self.history: set = set()

    # ----------------------------------------------------------- arguments

    def arg(self, tk: _Taker, a: A.Arg) -> A.AlbertType:
        match a:
            case A.Var(x):
                return tk.take(x, a)
            case A.Val(v):
                t = T.value_type(v)
                try:
                    T.well_formed(t)
                except AlbertTypeError as exc:
                    raise exc.located(a.pos)
                if not T.check_value(v, t):
                    raise _err(K.TypeMismatch, f"literal does not inhabit {print_type(t)}", a)
                return t
            case A.RecordArg(fields):
                return T.env_of((l, tk.take(x, a)) for l, x in fields)
        raise TypeError(a)

    # ---------------------------------------------------------------- rhs

    def rhs(self, env: RecordEnv, r: A.Rhs) -> TypedRhs:
        tk = _Taker(env, self.history)
        ty, branches, scrut_ty = self._rhs(tk, r)
        return TypedRhs(r, tk.consumed(), ty, branches, scrut_ty)

    def _rhs(self, tk: _Taker, r: A.Rhs):
        match r:
            case A.ArgRhs(a):
                return self.arg(tk, a), (), None
            case A.Apply(f, a):
                return self._apply(tk, r, f, a), (), None
            case A.Proj(x, l):
                t = tk.take(x, r)
                if not isinstance(t, A.RecordTy) or t.get(l) is None:
                    raise _err(K.TypeMismatch, f"{x} : {print_type(t)} has no field {l}", r)
                return t.get(l), (), None
            case A.Update(x, fields):
                t = tk.take(x, r)
                if not isinstance(t, A.RecordTy):
                    raise _err(K.TypeMismatch, f"record update of non-record {x} : {print_type(t)}", r)
                for l, y in fields:
                    ft = t.get(l)
                    if ft is None:
                        raise _err(K.TypeMismatch, f"{x} : {print_type(t)} has no field {l}", r)
                    yt = tk.take(y, r)
                    if yt != ft:
                        raise _err(
                            K.TypeMismatch, f"field {l} expects {print_type(ft)}, got {y} : {print_type(yt)}", r
                        )
                return t, (), None
            case A.Construct(c, a, annot):
                at = self.arg(tk, a)
                if annot is None:
                    if c != "Some":
                        raise _err(K.TypeMismatch, f"constructor {c} needs a type annotation", r)
                    return A.OptionTy(at), (), None
                try:
                    T.well_formed(annot)
                except AlbertTypeError as exc:
                    raise exc.located(r.pos)
                view = T.variant_view(annot)
                if view is None:
                    raise _err(K.TypeMismatch, f"{print_type(annot)} is not a variant type", r)
                pt = view.get(c)
                if pt is None:
                    raise _err(K.UnknownConstructor, f"{c} is not a constructor of {print_type(annot)}", r)
                if pt != at:
                    raise _err(
                        K.TypeMismatch, f"constructor {c} expects {print_type(pt)}, got {print_type(at)}", r
                    )
                return annot, (), None
            case A.BinOp(op, x, y):
                tx = tk.take(x, r)
                ty = tk.take(y, r)
                return self._binop(r, op, tx, ty), (), None
            case A.MapUpdate(m, k, v):
                tm = tk.take(m, r)
                tkey = tk.take(k, r)
                tv = tk.take(v, r)
                if not isinstance(tm, A.MapTy) or tm.key != tkey or tv != A.OptionTy(tm.val):
                    raise _err(
                        K.TypeMismatch,
                        f"update expects map k v, k, option v; got {print_type(tm)}, "
                        f"{print_type(tkey)}, {print_type(tv)}",
                        r,
                    )
                return tm, (), None
            case A.MatchRhs(x, branches):
                return self._match_rhs(tk, r, x, branches)
        raise TypeError(r)

    def _binop(self, r, op, tx, ty):
        if op == "add":
            if tx == ty and tx in _ARITH:
                return tx
            raise _err(K.TypeMismatch, f"cannot add {print_type(tx)} and {print_type(ty)}", r)
        if op == "ge":
            if tx == ty and tx in _ARITH:
                return A.BOOL
            raise _err(K.TypeMismatch, f"cannot compare {print_type(tx)} and {print_type(ty)}", r)
        if op == "mapget":
            if isinstance(tx, A.MapTy) and tx.key == ty:
                return A.OptionTy(tx.val)
            raise _err(K.TypeMismatch, f"cannot index {print_type(tx)} with {print_type(ty)}", r)
        raise _err(K.TypeMismatch, f"unknown operator {op}", r)

    def _apply(self, tk: _Taker, r, f: str, a: A.Arg):
        at = self.arg(tk, a)
        if f == "dup":
            return A.RecordTy((("car", at), ("cdr", at)))
        if f == "amount":
            if at != A.UNIT:
                raise _err(K.TypeMismatch, f"amount takes {{}}, got {print_type(at)}", r)
            return A.MUTEZ
        if f == "failwith":
            if T.contains_operation(at):
                raise _err(K.TypeMismatch, "cannot fail with a value containing operations", r)
            return None
        if f == "assert_some":
            if isinstance(at, A.RecordTy) and at.labels() == ("opt",) and isinstance(at.get("opt"), A.OptionTy):
                return A.RecordTy((("res", at.get("opt").elem),))
            raise _err(K.TypeMismatch, f"assert_some expects {{opt : option a}}, got {print_type(at)}", r)
        fn = self.functions.get(f)
        if fn is None:
            raise _err(K.UnknownFunction, f"function {f} is not defined before this point", r)
        if at != fn.input:
            raise _err(
                K.TypeMismatch, f"{f} expects {print_type(fn.input)}, got {print_type(at)}", r
            )
        return fn.output

    def _scrutinee(self, tk: _Taker, node, x: str, branches):
        t = tk.take(x, node)
        view = T.variant_view(t)
        if view is None:
            raise _err(K.TypeMismatch, f"cannot match on {x} : {print_type(t)}", node)
        try:
            check_exhaustive(view, [c for c, _, _ in branches])
        except AlbertTypeError as exc:
            raise exc.located(node.pos)
        return t, view

    def _match_rhs(self, tk: _Taker, r, x, branches):
        t, view = self._scrutinee(tk, r, x, branches)
        rest = T.env_of(tk.avail.items())
        typed = []
        outer = None
        result = None
        for c, b, body in branches:
            benv = self._bind(rest, b, view.get(c), r)
            tr = self.rhs(benv, body)
            typed.append(tr)
            if tr.ty is None:
                continue
            if tr.consumed.get(b) is None:
                raise _err(K.LinearityLeftover, f"pattern variable {b} is never consumed", body)
            used = T.split(tr.consumed, [b])[1]
            if result is None:
                outer, result = used, tr.ty
            elif tr.ty != result:
                raise _err(
                    K.TypeMismatch,
                    f"match branches produce {print_type(result)} and {print_type(tr.ty)}",
                    body,
                )
            elif used != outer:
                raise _err(
                    K.LinearityLeftover,
                    f"match branches consume different variables: {print_type(outer)} vs {print_type(used)}",
                    body,
                )
        if outer is not None:
            for l, _ in outer.fields:
                tk.take(l, r)
        return result, tuple(typed), t

    def _bind(self, env: RecordEnv, name: str, t: A.AlbertType, node) -> RecordEnv:
        self.history.add(name)
        try:
            return T.join(env, A.RecordTy(((name, t),)))
        except JoinError:
            raise _err(K.VariableAlreadyBound, f"variable {name} is already bound", node)

    # -------------------------------------------------------- instructions

    def instruction(self, env: RecordEnv, i: A.Instruction) -> TypedInstr:
        try:
            return self._instruction(env, i)
        except AlbertTypeError as exc:
            raise exc.located(i.pos)

    def _instruction(self, env: RecordEnv, i: A.Instruction) -> TypedInstr:
        match i:
            case A.Noop():
                return TypedInstr(i, env, env)
            case A.Seq(a, b):
                ta = self.instruction(env, a)
                if ta.env_out is None:
                    raise _err(K.TypeMismatch, "unreachable instruction after a failing one", b)
                tb = self.instruction(ta.env_out, b)
                return TypedInstr(i, env, tb.env_out, (ta, tb))
            case A.Drop(x):
                if env.get(x) is None:
                    raise _err(K.UnboundVariable, f"cannot drop unbound variable {x}", i)
                return TypedInstr(i, env, T.split(env, [x])[1])
            case A.Assign(lhs, r):
                tr = self.rhs(env, r)
                if tr.ty is None:
                    return TypedInstr(i, env, None, rhs=tr)
                produced = typecheck_lhs(tr.ty, lhs)
                return TypedInstr(i, env, self._merge(env, tr, produced, i), rhs=tr)
            case A.RhsInstr(r):
                tr = self.rhs(env, r)
                if tr.ty is None:
                    return TypedInstr(i, env, None, rhs=tr)
                if not isinstance(tr.ty, A.RecordTy):
                    raise _err(
                        K.TypeMismatch,
                        f"an instruction must produce a record of variables, got {print_type(tr.ty)}",
                        i,
                    )
                return TypedInstr(i, env, self._merge(env, tr, tr.ty, i), rhs=tr)
            case A.MatchInstr(x, branches):
                tk = _Taker(env, self.history)
                t, view = self._scrutinee(tk, i, x, branches)
                rest = T.env_of(tk.avail.items())
                bodies = []
                out = None
                for c, b, body in branches:
                    benv = self._bind(rest, b, view.get(c), i)
                    tb = self.instruction(benv, body)
                    bodies.append(tb)
                    if tb.env_out is None:
                        continue
                    if out is None:
                        out = tb.env_out
                    elif tb.env_out != out:
                        raise _err(
                            K.TypeMismatch,
                            f"match branches end in different environments: "
                            f"{print_type(out)} vs {print_type(tb.env_out)}",
                            body,
                        )
                return TypedInstr(i, env, out, tuple(bodies), scrut_ty=t)
        raise TypeError(i)

    def _merge(self, env, tr: TypedRhs, produced: RecordEnv, node) -> RecordEnv:
        rest = T.split(env, tr.consumed.labels())[1]
        self.history.update(produced.labels())
        try:
            return T.join(rest, produced)
        except JoinError as exc:
            raise _err(K.VariableAlreadyBound, f"variable {exc.label} is already bound", node)

    # ----------------------------------------------------------- functions

    def function(self, f: A.FunctionDef) -> TypedFunction:
        if f.name in A.BUILTIN_FUNCTIONS or f.name in self.functions:
            raise AlbertTypeError(K.TypeMismatch, f"function name {f.name} is reserved or already defined")
        for which, t in (("input", f.input), ("output", f.output)):
            T.well_formed(t, which)
            if not isinstance(t, A.RecordTy):
                raise AlbertTypeError(K.TypeMismatch, f"function {which} must be a record type, got {print_type(t)}")
        self.history = set(f.input.labels())
        body = self.instruction(f.input, f.body)
        out = body.env_out
        if out is not None and out != f.output:
            extra = [l for l in out.labels() if f.output.get(l) is None]
            if extra and all(out.get(l) == t for l, t in f.output.fields):
                raise AlbertTypeError(
                    K.LinearityLeftover, "variables never consumed: " + ", ".join(extra)
                )
            raise AlbertTypeError(
                K.TypeMismatch, f"body produces {print_type(out)}, declared output is {print_type(f.output)}"
            )
        tf = TypedFunction(f.name, f.input, f.output, body)
        self.functions[f.name] = tf
        return tf


def typecheck_instruction(env: RecordEnv, i: A.Instruction, functions=()) -> tuple[TypedInstr, Optional[RecordEnv]]:
    typer = Typer()
    for f in functions:
        typer.functions[f.name] = f
    ti = typer.instruction(env, i)
    return ti, ti.env_out


def typecheck_rhs(env: RecordEnv, r: A.Rhs, functions=()) -> tuple[RecordEnv, Optional[A.AlbertType]]:
    typer = Typer()
    for f in functions:
        typer.functions[f.name] = f
    tr = typer.rhs(env, r)
    return tr.consumed, tr.ty


def typecheck_program(p: A.Program) -> TypedProgram:
    """Inline aliases, normalize, then check every function top to bottom."""
    p = T.prepare_program(p)
    typer = Typer()
    out = []
    for f in p.functions:
        try:
            out.append(typer.function(f))
        except AlbertTypeError as exc:
            raise exc.located(f.pos, f.name)
    return TypedProgram(tuple(out))


# --------------------------------------------------------------------- dump


def dump_typed(tp: TypedProgram) -> str:
    """One line per instruction: ``env_in ⊢ instr ⊣ env_out``."""
    lines: list[str] = []

    def walk(ti: TypedInstr, depth: int):
        pad = "  " * depth
        node = ti.node
        if isinstance(node, A.Seq):
            for child in ti.children:
                walk(child, depth)
            return
        if isinstance(node, A.MatchInstr):
            lines.append(f"{pad}{_show_env(ti.env_in)} ⊢ match {node.scrutinee} with ⊣ {_show_env(ti.env_out)}")
            for (c, b, _), child in zip(node.branches, ti.children):
                lines.append(f"{pad}| {c} {b} ->")
                walk(child, depth + 1)
            return
        text = print_instruction(node).replace("\n", " ")
        lines.append(f"{pad}{_show_env(ti.env_in)} ⊢ {text} ⊣ {_show_env(ti.env_out)}")

    for f in tp.functions:
        lines.append(f"def {f.name} : {print_type(f.input)} -> {print_type(f.output)}")
        walk(f.body, 1)
    return "\n".join(lines) + "\n"
