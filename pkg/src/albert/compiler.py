"""Compilation of typechecked Albert programs to Michelson.

Types and values use right-nested comb encodings: a record with fields
l1 < l2 < ... < ln becomes ``pair c1 (pair c2 (... cn))``, a variant becomes
the same shape built from ``or``.  Singletons collapse to their payload and
the empty record is ``unit``.  bool and option map to the native types.

Variables live on the stack sorted by name, smallest on top.  Operands are
brought up with DIG, results are pushed back to their sorted slot with DUG.
User functions compile to self-contained blocks taking their input record on
top of the stack and leaving their output record there; calls inline them.
"""

from __future__ import annotations

from bisect import bisect_left
from itertools import count

from . import types as T
from .errors import AlbertTypeError, TypeErrorKind as K
from .evaluator import ASSERT_SOME_PAYLOAD
from .michelson import core as M
from .michelson.core import I
from .michelson.typecheck import typecheck_script
from .syntax import ast as A
from .syntax.printer import print_type
from .typer import TypedFunction, TypedInstr, TypedProgram, TypedRhs

# ------------------------------------------------------------------ types

_PRIMS = {
    "nat": M.T_NAT,
    "int": M.T_INT,
    "string": M.T_STRING,
    "mutez": M.T_MUTEZ,
    "bool": M.T_BOOL,
    "operation": M.T_OPERATION,
}


def compile_type(t: A.AlbertType) -> M.MType:
    match t:
        case A.Prim(kind):
            return _PRIMS[kind]
        case A.RecordTy(fields):
            return _comb(M.pair, [compile_type(ft) for _, ft in fields], M.T_UNIT)
        case A.VariantTy(ctors):
            return _comb(M.or_, [compile_type(ct) for _, ct in ctors], None)
        case A.ListTy(e):
            return M.list_(compile_type(e))
        case A.MapTy(k, v):
            return M.map_(compile_type(k), compile_type(v))
        case A.OptionTy(e):
            return M.option(compile_type(e))
    raise TypeError(f"cannot compile type {t!r}")


def _comb(node, parts, empty):
    if not parts:
        return empty
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = node(p, out)
    return out


def _ctor_index(t: A.VariantTy, c: str) -> int:
    return t.labels().index(c)


def _wrap_ctor(m: M.MValue, i: int, n: int) -> M.MValue:
    """Inject a payload at constructor position ``i`` of an ``n``-way comb."""
    if n == 1:
        return m
    out = M.Left(m) if i < n - 1 else M.Right(m)
    for _ in range(min(i, n - 2)):
        out = M.Right(out)
    return out


def compile_value(v: A.Value, t: A.AlbertType) -> M.MValue:
    match t, v:
        case A.Prim("nat"), A.NatVal(n):
            return M.Nat(n)
        case A.Prim("int"), A.IntVal(n):
            return M.Int(n)
        case A.Prim("mutez"), A.MutezVal(n):
            return M.Mutez(n)
        case A.Prim("string"), A.StringVal(s):
            return M.String(s)
        case A.Prim("bool"), A.BoolVal(b):
            return M.Bool(b)
        case A.Prim("operation"), A.OperationVal(d):
            return M.OperationV(d)
        case A.RecordTy(fields), A.RecordVal():
            parts = [compile_value(v.get(l), ft) for l, ft in fields]
            return _comb(M.Pair, parts, M.Unit())
        case A.VariantTy(ctors), A.VariantVal(c, payload, _):
            i = _ctor_index(t, c)
            return _wrap_ctor(compile_value(payload, ctors[i][1]), i, len(ctors))
        case A.ListTy(e), A.ListVal(elems, _):
            return M.ListV(tuple(compile_value(x, e) for x in elems))
        case A.MapTy(kt, vt), A.MapVal(entries, _, _):
            return M.MapV(tuple((compile_value(k, kt), compile_value(x, vt)) for k, x in entries))
        case A.OptionTy(_), A.NoneVal():
            return M.NoneV()
        case A.OptionTy(e), A.SomeVal(payload):
            return M.SomeV(compile_value(payload, e))
    raise TypeError(f"value {v!r} does not have type {print_type(t)}")


def decode_value(m: M.MValue, t: A.AlbertType) -> A.Value:
    match t, m:
        case A.Prim("nat"), M.Nat(n):
            return A.NatVal(n)
        case A.Prim("int"), M.Int(n):
            return A.IntVal(n)
        case A.Prim("mutez"), M.Mutez(n):
            return A.MutezVal(n)
        case A.Prim("string"), M.String(s):
            return A.StringVal(s)
        case A.Prim("bool"), M.Bool(b):
            return A.BoolVal(b)
        case A.Prim("operation"), M.OperationV(d):
            return A.OperationVal(d)
        case A.RecordTy(fields), _:
            out = []
            for k, (l, ft) in enumerate(fields):
                if k == len(fields) - 1:
                    out.append((l, decode_value(m, ft)))
                else:
                    out.append((l, decode_value(m.left, ft)))
                    m = m.right
            return A.RecordVal(tuple(out))
        case A.VariantTy(ctors), _:
            n = len(ctors)
            for i, (c, ct) in enumerate(ctors):
                if i == n - 1:
                    return A.VariantVal(c, decode_value(m, ct), t)
                if isinstance(m, M.Left):
                    return A.VariantVal(c, decode_value(m.value, ct), t)
                m = m.value
        case A.ListTy(e), M.ListV(elems):
            return A.ListVal(tuple(decode_value(x, e) for x in elems), e)
        case A.MapTy(kt, vt), M.MapV(entries):
            return A.MapVal(tuple((decode_value(k, kt), decode_value(x, vt)) for k, x in entries), kt, vt)
        case A.OptionTy(e), M.NoneV():
            return A.NoneVal(e)
        case A.OptionTy(e), M.SomeV(x):
            return A.SomeVal(decode_value(x, e))
    raise TypeError(f"Michelson value {m!r} does not encode {print_type(t)}")


# ---------------------------------------------------------------- emitter


class _Temp:
    """An anonymous stack slot."""

    _ids = count()

    def __init__(self, hint: str = ""):
        self.id = next(self._ids)
        self.hint = hint

    def __repr__(self):
        return f"<tmp{self.id}{':' + self.hint if self.hint else ''}>"


class Emitter:
    """Symbolic stack (index 0 = top) plus the code emitted so far."""

    def __init__(self, stack):
        self.stack: list = list(stack)
        self.code: list = []
        self.failed = False

    def emit(self, op: str, *args) -> None:
        self.code.append(I(op, *args))

    def push(self, op: str, *args, slot=None):
        self.emit(op, *args)
        slot = slot if slot is not None else _Temp(op)
        self.stack.insert(0, slot)
        return slot

    def dig(self, slot) -> None:
        n = self.stack.index(slot)
        if n:
            self.emit("DIG", n)
            self.stack.insert(0, self.stack.pop(n))

    def drop_top(self) -> None:
        self.emit("DROP")
        self.stack.pop(0)

    def fail(self) -> None:
        self.emit("FAILWITH")
        self.failed = True
        self.stack = []

    def rename_top(self, slot) -> None:
        self.stack[0] = slot

    def settle(self, k: int) -> None:
        """The top ``k`` slots are freshly bound names; DUG each into its sorted slot."""
        for i in range(k):
            if _is_sorted(self.stack):
                return
            name = self.stack[0]
            pending = k - i - 1
            region = self.stack[1 + pending:]
            pos = pending + bisect_left(region, name)
            if pos:
                self.emit("DUG", pos)
                self.stack.insert(pos, self.stack.pop(0))

    def branch(self):
        return Emitter(self.stack)


# --------------------------------------------------------------- compiler


class Compiler:
    def __init__(self, program: TypedProgram):
        self.program = program
        self.blocks: dict[str, tuple] = {}

    # ----------------------------------------------------- record shuffles

    def unpack(self, em: Emitter, t: A.RecordTy, names) -> None:
        """Replace the record on top by its fields, each named from ``names``."""
        n = len(t.fields)
        if n == 0:
            em.drop_top()
            return
        em.rename_top(names[0] if n == 1 else em.stack[0])
        for k in range(n - 1):
            em.emit("UNPAIR")
            rest = _Temp("rest")
            em.stack[0:1] = [names[k], rest]
            if k < n - 2:
                em.emit("SWAP")
                em.stack[0], em.stack[1] = em.stack[1], em.stack[0]
            else:
                em.stack[1] = names[n - 1]

    def pack(self, em: Emitter, slots) -> None:
        """Build a comb record on top from ``slots`` (given in field order)."""
        if not slots:
            em.push("UNIT")
            return
        em.dig(slots[-1])
        for s in reversed(slots[:-1]):
            em.dig(s)
            em.emit("PAIR")
            em.stack[0:2] = [_Temp("pair")]

    def push_value(self, em: Emitter, v: A.Value, t: A.AlbertType) -> None:
        mt = compile_type(t)
        if mt == M.T_UNIT:
            em.push("UNIT")
        elif M.pushable(mt):
            em.push("PUSH", mt, compile_value(v, t))
        else:
            self._build_value(em, v, t)

    def _build_value(self, em: Emitter, v: A.Value, t: A.AlbertType) -> None:
        """Values containing operations cannot be PUSHed; assemble them."""
        match t, v:
            case A.ListTy(e), A.ListVal(elems, _):
                em.push("NIL", compile_type(e))
                for x in reversed(elems):
                    self.push_value(em, x, e)
                    em.emit("CONS")
                    em.stack[0:2] = [_Temp("list")]
            case A.RecordTy(fields), A.RecordVal():
                slots = []
                for l, ft in reversed(fields):
                    self.push_value(em, v.get(l), ft)
                    slots.insert(0, em.stack[0])
                self.pack(em, slots)
            case A.VariantTy(ctors), A.VariantVal(c, payload, _):
                i = _ctor_index(t, c)
                self.push_value(em, payload, ctors[i][1])
                self._inject(em, t, i)
            case A.OptionTy(e), A.NoneVal():
                em.push("NONE", compile_type(e))
            case A.OptionTy(e), A.SomeVal(payload):
                self.push_value(em, payload, e)
                em.emit("SOME")
            case _:
                raise TypeError(f"cannot build value {v!r}")

    def _inject(self, em: Emitter, t: A.VariantTy, i: int) -> None:
        parts = [compile_type(ct) for _, ct in t.ctors]
        n = len(parts)
        if n == 1:
            return
        if i < n - 1:
            em.emit("LEFT", _comb(M.or_, parts[i + 1:], None))
        else:
            em.emit("RIGHT", parts[n - 2])
        for j in range(min(i, n - 2) - 1, -1, -1):
            em.emit("RIGHT", parts[j])
        em.rename_top(_Temp("variant"))

    # ---------------------------------------------------------------- args

    def arg(self, em: Emitter, a, types: dict) -> A.AlbertType:
        match a:
            case A.Var(x):
                em.dig(x)
                em.rename_top(_Temp(x))
                return types[x]
            case A.Val(v):
                t = T.value_type(v)
                self.push_value(em, v, t)
                return t
            case A.RecordArg(fields):
                fields = sorted(fields, key=lambda f: f[0].encode())
                self.pack(em, [x for _, x in fields])
                return T.env_of((l, types[x]) for l, x in fields)
        raise TypeError(a)

    # ----------------------------------------------------------------- rhs

    def rhs(self, em: Emitter, tr: TypedRhs, types: dict) -> None:
        """Leave the value of ``tr`` on top; its consumed variables are gone."""
        r = tr.node
        match r:
            case A.ArgRhs(a):
                self.arg(em, a, types)
            case A.Apply(f, a):
                self.apply(em, f, a, types)
            case A.Proj(x, l):
                t = types[x]
                em.dig(x)
                n = len(t.fields)
                i = t.labels().index(l)
                for _ in range(i):
                    em.emit("CDR")
                if n > 1 and i < n - 1:
                    em.emit("CAR")
                em.rename_top(_Temp("proj"))
            case A.Update(x, fields):
                t = types[x]
                em.dig(x)
                slots = [_Temp(l) for l in t.labels()]
                self.unpack(em, t, slots)
                new = dict(zip(t.labels(), slots))
                for l, y in fields:
                    em.dig(new[l])
                    em.drop_top()
                    new[l] = y
                self.pack(em, [new[l] for l in t.labels()])
            case A.Construct(c, a, annot):
                self.arg(em, a, types)
                match annot:
                    case None | A.OptionTy():
                        if c == "Some":
                            em.emit("SOME")
                        else:
                            em.drop_top()
                            em.push("NONE", compile_type(annot.elem))
                    case A.Prim("bool"):
                        em.drop_top()
                        em.push("PUSH", M.T_BOOL, M.Bool(c == "True"))
                    case A.VariantTy():
                        self._inject(em, annot, _ctor_index(annot, c))
            case A.BinOp(op, x, y):
                if op == "mapget":
                    em.dig(x)
                    em.dig(y)
                    em.emit("GET")
                elif op == "ge":
                    em.dig(y)
                    em.dig(x)
                    em.emit("COMPARE")
                    em.emit("GE")
                else:
                    em.dig(y)
                    em.dig(x)
                    em.emit("ADD")
                em.stack[0:2] = [_Temp(op)]
            case A.MapUpdate(m, k, v):
                em.dig(m)
                em.dig(v)
                em.dig(k)
                em.emit("UPDATE")
                em.stack[0:3] = [_Temp("update")]
            case A.MatchRhs(x, branches):
                def body(sub: Emitter, i: int, binder: str, bt):
                    sub.rename_top(binder)
                    self.rhs(sub, tr.branches[i], {**types, binder: bt})

                self._branching(em, x, tr.scrut_ty, branches, body)
            case _:
                raise TypeError(r)
        if tr.ty is None and not em.failed:
            raise AssertionError("rhs typed as failing did not fail")

    def apply(self, em: Emitter, f: str, a, types: dict) -> None:
        if f == "amount" and not isinstance(a, A.Var):
            # the unit argument is a literal; nothing to consume
            em.push("AMOUNT")
            return
        self.arg(em, a, types)
        match f:
            case "dup":
                em.emit("DUP")
                em.emit("PAIR")
                em.rename_top(_Temp("dup"))
            case "amount":
                em.drop_top()
                em.push("AMOUNT")
            case "failwith":
                em.fail()
            case "assert_some":
                fail = (I("PUSH", M.T_STRING, M.String(ASSERT_SOME_PAYLOAD.value)), I("FAILWITH"))
                em.emit("IF_NONE", fail, ())
            case _:
                em.code.extend(self.block(self.program.function(f)))
                em.rename_top(_Temp(f))

    # ------------------------------------------------------------ matching

    def _branching(self, em: Emitter, x: str, scrut_ty, branches, body) -> None:
        """Dispatch on variant ``x``; ``body(sub, i, binder, payload_ty)`` fills a branch
        whose payload sits on top of ``sub``."""
        em.dig(x)
        em.stack.pop(0)
        by_ctor = {c: (i, b) for i, (c, b, _) in enumerate(branches)}
        view = T.variant_view(scrut_ty)

        def arm(c: str, push_unit: bool):
            i, b = by_ctor[c]
            sub = em.branch()
            if push_unit:
                sub.push("UNIT")
            else:
                sub.stack.insert(0, _Temp("payload"))
            body(sub, i, b, view.get(c))
            return sub

        match scrut_ty:
            case A.Prim("bool"):
                arms = [arm("True", True), arm("False", True)]
                em.emit("IF", tuple(arms[0].code), tuple(arms[1].code))
            case A.OptionTy():
                arms = [arm("None", True), arm("Some", False)]
                em.emit("IF_NONE", tuple(arms[0].code), tuple(arms[1].code))
            case _:
                labels = view.labels()
                arms = [arm(c, False) for c in labels]
                if len(arms) == 1:
                    em.code.extend(arms[0].code)
                else:
                    code = tuple(arms[-1].code)
                    for sub in reversed(arms[:-1]):
                        code = (I("IF_LEFT", tuple(sub.code), code),)
                    em.code.extend(code)
        live = [s for s in arms if not s.failed]
        if not live:
            em.failed = True
            em.stack = []
            return
        for s in live[1:]:
            if _shape(s.stack) != _shape(live[0].stack):
                raise AssertionError(f"branches end in different layouts: {live[0].stack} vs {s.stack}")
        em.stack = live[0].stack

    # -------------------------------------------------------- instructions

    def instruction(self, em: Emitter, ti: TypedInstr) -> None:
        node = ti.node
        types = dict(ti.env_in.fields)
        match node:
            case A.Noop():
                pass
            case A.Seq():
                for child in ti.children:
                    self.instruction(em, child)
            case A.Drop(x):
                em.dig(x)
                em.drop_top()
            case A.Assign(lhs, _):
                self.rhs(em, ti.rhs, types)
                if not em.failed:
                    match lhs:
                        case A.Var(x):
                            em.rename_top(x)
                            em.settle(1)
                        case A.RecordPat(fields):
                            names = dict(fields)
                            t = ti.rhs.ty
                            self.unpack(em, t, [names[l] for l in t.labels()])
                            em.settle(len(t.fields))
            case A.RhsInstr(_):
                self.rhs(em, ti.rhs, types)
                if not em.failed:
                    t = ti.rhs.ty
                    self.unpack(em, t, list(t.labels()))
                    em.settle(len(t.fields))
            case A.MatchInstr(x, branches):
                def body(sub: Emitter, i: int, binder: str, bt):
                    sub.rename_top(binder)
                    sub.settle(1)
                    self.instruction(sub, ti.children[i])

                self._branching(em, x, ti.scrut_ty, branches, body)
            case _:
                raise TypeError(node)
        self._check_layout(em, ti.env_out)

    def _check_layout(self, em: Emitter, env_out) -> None:
        if env_out is None:
            if not em.failed:
                raise AssertionError("instruction typed as failing did not fail")
            return
        if em.failed:
            raise AssertionError("instruction failed but was typed as returning")
        want = list(env_out.labels())
        if em.stack != want:
            raise AssertionError(f"layout {em.stack} does not match environment {want}")

    # ------------------------------------------------------------- functions

    def block(self, fn: TypedFunction) -> tuple:
        """Code taking ``fn``'s input record on top to its output record on top."""
        if fn.name in self.blocks:
            return self.blocks[fn.name]
        em = Emitter([_Temp("input")])
        labels = list(fn.input.labels())
        self.unpack(em, fn.input, labels)
        em.settle(len(labels))
        self._check_layout(em, fn.input)
        self.instruction(em, fn.body)
        if not em.failed:
            self.pack(em, list(fn.output.labels()))
            if len(em.stack) != 1:
                raise AssertionError(f"function {fn.name} leaves {em.stack} behind")
        code = tuple(em.code)
        self.blocks[fn.name] = code
        return code


def _is_sorted(stack) -> bool:
    return all(isinstance(s, str) for s in stack) and all(a < b for a, b in zip(stack, stack[1:]))


def _shape(stack):
    return [s if isinstance(s, str) else "_" for s in stack]


# ----------------------------------------------------------------- API


def compile_instruction(layout, ti: TypedInstr, program: TypedProgram | None = None):
    """Compile one instruction from a sorted layout; returns (code, layout')."""
    if list(layout) != list(ti.env_in.labels()):
        raise AssertionError("layout does not match the instruction's input environment")
    em = Emitter(layout)
    Compiler(program or TypedProgram(())).instruction(em, ti)
    return tuple(em.code), (None if em.failed else list(em.stack))


def compile_function(p: TypedProgram, name: str) -> tuple:
    return Compiler(p).block(p.function(name))


def contract_types(fn: TypedFunction) -> tuple[A.AlbertType, A.AlbertType]:
    """(parameter, storage) of a function obeying the calling convention."""
    i, o = fn.input, fn.output
    ok = (
        i.labels() == ("param", "store")
        and o.labels() == ("operations", "store")
        and o.get("operations") == A.ListTy(A.OPERATION)
        and i.get("store") == o.get("store")
    )
    if not ok:
        raise AlbertTypeError(
            K.TypeMismatch,
            f"{fn.name} must have type {{param : P; store : S}} -> "
            f"{{operations : list operation; store : S}}, "
            f"got {print_type(i)} -> {print_type(o)}",
            function=fn.name,
        )
    return i.get("param"), i.get("store")


def compile_contract(p: TypedProgram, main: str) -> M.Script:
    fn = p.function(main)
    param, storage = contract_types(fn)
    script = M.Script(compile_type(param), compile_type(storage), compile_function(p, main))
    typecheck_script(script)
    return script
