"""Type-directed random Albert programs.

Programs are built instruction by instruction against a typing environment
that the generator tracks itself, so every output typechecks by
construction.  The last function, ``main``, follows the contract calling
convention so it can be compiled and run on both backends.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field

from .. import types as T
from ..syntax import ast as A

MAX_FIELDS = 4
MAX_CTORS = 3
MAX_TYPE_DEPTH = 3
MAX_MATCH_DEPTH = 2
MAX_HELPERS = 2

_VAR_PREFIXES = ("a", "b", "c", "k", "m", "s", "t", "v", "w", "x", "y", "z")
_LABELS = ("fa", "fb", "fc", "fd", "ge", "hi", "id", "ka", "lo", "no")
_CTORS = ("A", "B", "C", "D", "E", "K", "L", "M", "P", "Q")
_STRINGS = ("", "yes", "no", "a", "ab", "b", "zz", "Z", "maybe")
_ARITH = (A.NAT, A.INT, A.MUTEZ)


@dataclass
class GenStats:
    """Counts of generated Rhs constructors, keyed by class name."""

    rhs: Counter = field(default_factory=Counter)


class Generator:
    def __init__(self, seed: int, budget: int):
        self.rng = random.Random(seed)
        self.budget = budget
        self.counter = 0
        self.helpers: list[A.FunctionDef] = []
        self.stats = GenStats()

    # ---------------------------------------------------------------- names

    def fresh(self) -> str:
        self.counter += 1
        return f"{self.rng.choice(_VAR_PREFIXES)}{self.counter}"

    def labels(self, n: int, pool=_LABELS) -> list[str]:
        return sorted(self.rng.sample(pool, n), key=str.encode)

    # ---------------------------------------------------------------- types

    def rand_type(self, depth: int = 0) -> A.AlbertType:
        r = self.rng.random()
        if depth >= MAX_TYPE_DEPTH or r < 0.5:
            return self.rng.choice((A.NAT, A.INT, A.STRING, A.MUTEZ, A.BOOL))
        if r < 0.62:
            return A.OptionTy(self.rand_type(depth + 1))
        if r < 0.82:
            return self.rand_record(depth + 1)
        if r < 0.92:
            return self.rand_variant(depth + 1)
        if r < 0.96:
            return A.ListTy(self.rand_type(depth + 1))
        return A.MapTy(self.rand_comparable(), self.rand_type(depth + 1))

    def rand_comparable(self) -> A.AlbertType:
        return self.rng.choice((A.NAT, A.INT, A.STRING, A.MUTEZ))

    def rand_record(self, depth: int = 0, lo: int = 0) -> A.RecordTy:
        n = self.rng.randint(lo, MAX_FIELDS)
        return A.RecordTy(tuple((l, self.rand_type(depth)) for l in self.labels(n)))

    def rand_variant(self, depth: int = 0, must: A.AlbertType | None = None) -> A.VariantTy:
        n = self.rng.randint(1 if must is not None else 2, MAX_CTORS)
        payloads = [self.rand_type(depth) if self.rng.random() < 0.7 else A.UNIT for _ in range(n)]
        if must is not None:
            payloads[self.rng.randrange(n)] = must
        return A.VariantTy(tuple(zip(self.labels(n, _CTORS), payloads)))

    # --------------------------------------------------------------- values

    def rand_value(self, t: A.AlbertType) -> A.Value:
        rng = self.rng
        match t:
            case A.Prim("nat"):
                return A.NatVal(rng.choice((0, 1, 2, 3, 7, 100, rng.randrange(10**6))))
            case A.Prim("int"):
                return A.IntVal(rng.choice((0, 1, -1, 5, -100, rng.randrange(-(10**6), 10**6))))
            case A.Prim("mutez"):
                if rng.random() < 0.1:
                    return A.MutezVal(A.MUTEZ_BOUND - 1 - rng.randrange(100))
                return A.MutezVal(rng.choice((0, 1, 99, 100, rng.randrange(10**6))))
            case A.Prim("string"):
                return A.StringVal(rng.choice(_STRINGS))
            case A.Prim("bool"):
                return A.BoolVal(rng.random() < 0.5)
            case A.RecordTy(fields):
                return A.RecordVal(tuple((l, self.rand_value(ft)) for l, ft in fields))
            case A.VariantTy(ctors):
                c, pt = rng.choice(ctors)
                return A.VariantVal(c, self.rand_value(pt), t)
            case A.OptionTy(e):
                return A.NoneVal(e) if rng.random() < 0.3 else A.SomeVal(self.rand_value(e))
            case A.ListTy(e):
                return A.ListVal(tuple(self.rand_value(e) for _ in range(rng.randint(0, 3))), e)
            case A.MapTy(k, v):
                entries = {}
                for _ in range(rng.randint(0, 3)):
                    kv = self.rand_value(k)
                    entries[kv] = self.rand_value(v)
                items = sorted(entries.items(), key=lambda kv: A.sort_key(kv[0]))
                return A.MapVal(tuple(items), k, v)
        raise TypeError(f"cannot generate a value of {t!r}")

    # --------------------------------------------------------- instructions

    def _pick(self, env: dict, pred=lambda t: True):
        names = sorted(n for n, t in env.items() if pred(t))
        return self.rng.choice(names) if names else None

    def _rhs(self, r):
        self.stats.rhs[type(r).__name__] += 1
        return r

    def literal(self, env: dict, t: A.AlbertType | None = None) -> list:
        t = t if t is not None else self.rand_type()
        x = self.fresh()
        env[x] = t
        return [A.Assign(A.Var(x), self._rhs(A.ArgRhs(A.Val(self.rand_value(t)))))]

    def ensure(self, env: dict, t: A.AlbertType, out: list) -> str:
        """A variable of type ``t``, creating it from a literal if needed."""
        x = self._pick(env, lambda u: u == t)
        if x is None:
            out.extend(self.literal(env, t))
            x = self._pick(env, lambda u: u == t)
        return x

    def _assign(self, env: dict, rhs, t: A.AlbertType) -> list:
        y = self.fresh()
        env[y] = t
        return [A.Assign(A.Var(y), self._rhs(rhs))]

    def gen_rename(self, env, depth):
        x = self._pick(env)
        if x is None:
            return None
        t = env.pop(x)
        return self._assign(env, A.ArgRhs(A.Var(x)), t)

    def gen_drop(self, env, depth):
        x = self._pick(env)
        if x is None:
            return None
        del env[x]
        return [A.Drop(x)]

    def gen_dup(self, env, depth):
        x = self._pick(env)
        if x is None:
            return None
        t = env.pop(x)
        a, b = self.fresh(), self.fresh()
        env[a] = env[b] = t
        if self.rng.random() < 0.3:
            d = self.fresh()
            env.pop(a)
            env.pop(b)
            env[d] = A.RecordTy((("car", t), ("cdr", t)))
            return [A.Assign(A.Var(d), self._rhs(A.Apply("dup", A.Var(x))))]
        pat = A.RecordPat((("car", a), ("cdr", b)))
        return [A.Assign(pat, self._rhs(A.Apply("dup", A.Var(x))))]

    def gen_proj(self, env, depth):
        x = self._pick(env, lambda t: isinstance(t, A.RecordTy) and t.fields)
        if x is None:
            return None
        t = env.pop(x)
        l, ft = self.rng.choice(t.fields)
        return self._assign(env, A.Proj(x, l), ft)

    def gen_update(self, env, depth):
        x = self._pick(env, lambda t: isinstance(t, A.RecordTy) and t.fields)
        if x is None:
            return None
        t = env.pop(x)
        out: list = []
        chosen = self.rng.sample(t.fields, self.rng.randint(1, len(t.fields)))
        fields = []
        for l, ft in sorted(chosen, key=lambda f: f[0].encode()):
            y = self.ensure(env, ft, out)
            env.pop(y)
            fields.append((l, y))
        return out + self._assign(env, A.Update(x, tuple(fields)), t)

    def gen_record(self, env, depth):
        names = sorted(env)
        if not names:
            return None
        chosen = self.rng.sample(names, self.rng.randint(0, min(MAX_FIELDS, len(names))))
        labels = self.labels(len(chosen))
        fields = tuple(zip(labels, chosen))
        t = A.RecordTy(tuple((l, env.pop(x)) for l, x in fields))
        return self._assign(env, A.ArgRhs(A.RecordArg(fields)), t)

    def gen_destruct(self, env, depth):
        x = self._pick(env, lambda t: isinstance(t, A.RecordTy))
        if x is None:
            return None
        t = env.pop(x)
        fields = tuple((l, self.fresh()) for l, _ in t.fields)
        for (_, y), (_, ft) in zip(fields, t.fields):
            env[y] = ft
        self._rhs(A.ArgRhs(A.Var(x)))
        return [A.Assign(A.RecordPat(fields), A.ArgRhs(A.Var(x)))]

    def gen_construct(self, env, depth):
        out: list = []
        r = self.rng.random()
        if r < 0.15:
            t = A.OptionTy(self.rand_type(1))
            return self._assign(env, A.Construct("None", A.RecordArg(()), t), t)
        if r < 0.25:
            c = self.rng.choice(("True", "False"))
            return self._assign(env, A.Construct(c, A.RecordArg(()), A.BOOL), A.BOOL)
        x = self._pick(env)
        if x is None:
            return None
        tx = env.pop(x)
        if r < 0.45:
            return self._assign(env, A.Construct("Some", A.Var(x)), A.OptionTy(tx))
        vt = self.rand_variant(1, must=tx)
        c = self.rng.choice([c for c, pt in vt.ctors if pt == tx])
        return out + self._assign(env, A.Construct(c, A.Var(x), vt), vt)

    def gen_binop(self, env, depth):
        out: list = []
        op = self.rng.choice(("add", "ge", "mapget", "mapupdate"))
        if op in ("add", "ge"):
            t = self.rng.choice(_ARITH)
            x = self.ensure(env, t, out)
            env.pop(x)
            y = self.ensure(env, t, out)
            env.pop(y)
            if self.rng.random() < 0.5:
                x, y = y, x
            return out + self._assign(env, A.BinOp(op, x, y), t if op == "add" else A.BOOL)
        m = self._pick(env, lambda t: isinstance(t, A.MapTy))
        if m is None:
            mt = A.MapTy(self.rand_comparable(), self.rand_type(1))
            out.extend(self.literal(env, mt))
            m = self._pick(env, lambda t: t == mt)
        mt = env.pop(m)
        k = self.ensure(env, mt.key, out)
        env.pop(k)
        if op == "mapget":
            return out + self._assign(env, A.BinOp("mapget", m, k), A.OptionTy(mt.val))
        v = self.ensure(env, A.OptionTy(mt.val), out)
        env.pop(v)
        return out + self._assign(env, A.MapUpdate(m, k, v), mt)

    def gen_amount(self, env, depth):
        return self._assign(env, A.Apply("amount", A.RecordArg(())), A.MUTEZ)

    def gen_assert_some(self, env, depth):
        out: list = []
        o = self._pick(env, lambda t: isinstance(t, A.OptionTy))
        if o is None:
            out.extend(self.literal(env, A.OptionTy(self.rand_type(1))))
            o = self._pick(env, lambda t: isinstance(t, A.OptionTy))
        t = env.pop(o)
        y = self.fresh()
        env[y] = t.elem
        rhs = self._rhs(A.Apply("assert_some", A.RecordArg((("opt", o),))))
        return out + [A.Assign(A.RecordPat((("res", y),)), rhs)]

    def gen_call(self, env, depth):
        if not self.helpers:
            return None
        f = self.rng.choice(self.helpers)
        out: list = []
        fields = []
        for l, t in f.input.fields:
            x = self.ensure(env, t, out)
            env.pop(x)
            fields.append((l, x))
        rhs = self._rhs(A.Apply(f.name, A.RecordArg(tuple(fields))))
        if self.rng.random() < 0.5:
            y = self.fresh()
            env[y] = f.output
            return out + [A.Assign(A.Var(y), rhs)]
        pat = tuple((l, self.fresh()) for l, _ in f.output.fields)
        for (_, y), (_, t) in zip(pat, f.output.fields):
            env[y] = t
        return out + [A.Assign(A.RecordPat(pat), rhs)]

    def _scrutinee(self, env, out):
        x = self._pick(env, lambda t: T.variant_view(t) is not None)
        if x is None:
            t = self.rng.choice((A.BOOL, A.OptionTy(self.rand_type(1)), self.rand_variant(1)))
            out.extend(self.literal(env, t))
            x = self._pick(env, lambda u: u == t)
        return x, env.pop(x)

    def gen_match_rhs(self, env, depth):
        out: list = []
        x, t = self._scrutinee(env, out)
        view = T.variant_view(t)
        outer = None
        if env and self.rng.random() < 0.4:
            outer = self._pick(env)
        touter = env.pop(outer) if outer else None
        n = len(view.ctors)
        fail = set()
        if n > 1 and self.rng.random() < 0.25:
            fail.add(self.rng.randrange(n))
        binders = [self.fresh() for _ in range(n)]
        payloads = []
        for c, pt in view.ctors:
            payloads.append(A.RecordTy((("pa", pt), ("qa", touter))) if outer else pt)
        rt = A.VariantTy(tuple(zip(self.labels(n, _CTORS), payloads)))
        branches = []
        for i, ((c, pt), b) in enumerate(zip(view.ctors, binders)):
            if i in fail:
                body = A.Apply("failwith", A.Var(b))
                if outer:
                    # every live branch consumes the outer variable, so failing ones must too
                    body = A.Apply("failwith", A.RecordArg((("pa", b), ("qa", outer))))
            elif outer:
                body = A.Construct(rt.ctors[i][0], A.RecordArg((("pa", b), ("qa", outer))), rt)
            else:
                body = A.Construct(rt.ctors[i][0], A.Var(b), rt)
            branches.append((c, b, self._rhs(body)))
        return out + self._assign(env, A.MatchRhs(x, tuple(branches)), rt)

    def gen_match_instr(self, env, depth):
        if depth >= MAX_MATCH_DEPTH:
            return None
        out: list = []
        x, t = self._scrutinee(env, out)
        view = T.variant_view(t)
        target = dict(env)
        if self.rng.random() < 0.5:
            target[self.fresh()] = self.rand_type(1)
        n = len(view.ctors)
        fail = self.rng.randrange(n) if n > 1 and self.rng.random() < 0.25 else None
        branches = []
        for i, (c, pt) in enumerate(view.ctors):
            b = self.fresh()
            benv = {**env, b: pt}
            if i == fail:
                body = [A.RhsInstr(self._rhs(A.Apply("failwith", A.Var(b))))]
            else:
                body = self.block(benv, self.rng.randint(1, 4), depth + 1)
                body += self.reach(benv, target)
            branches.append((c, b, A.seq_of(body)))
        env.clear()
        env.update(target)
        return out + [A.MatchInstr(x, tuple(branches))]

    _KINDS = (
        ("literal", 3),
        ("rename", 1),
        ("drop", 1),
        ("dup", 2),
        ("proj", 2),
        ("update", 2),
        ("record", 2),
        ("destruct", 2),
        ("construct", 2),
        ("binop", 4),
        ("amount", 1),
        ("assert_some", 1),
        ("call", 2),
        ("match_rhs", 2),
        ("match_instr", 2),
    )

    def step(self, env: dict, depth: int) -> list:
        kinds = [k for k, _ in self._KINDS]
        weights = [w for _, w in self._KINDS]
        while True:
            kind = self.rng.choices(kinds, weights)[0]
            if kind == "literal":
                return self.literal(env)
            got = getattr(self, "gen_" + kind)(env, depth)
            if got is not None:
                return got

    def block(self, env: dict, n: int, depth: int = 0) -> list:
        out: list = []
        for _ in range(n):
            out.extend(self.step(env, depth))
        return out

    def reach(self, env: dict, target: dict) -> list:
        """Instructions turning ``env`` into exactly ``target``."""
        out: list = []
        for x in sorted(env):
            if target.get(x) != env[x]:
                del env[x]
                out.append(A.Drop(x))
        for x in sorted(target):
            if x not in env:
                env[x] = target[x]
                out.append(A.Assign(A.Var(x), self._rhs(A.ArgRhs(A.Val(self.rand_value(target[x]))))))
        return out

    # ------------------------------------------------------------ functions

    def helper(self, index: int) -> A.FunctionDef:
        tin = self.rand_record(1, lo=1)
        tout = self.rand_record(1, lo=1)
        # function labels are variable names inside the body
        tin = A.RecordTy(tuple(sorted(((self.fresh(), t) for _, t in tin.fields), key=lambda f: f[0].encode())))
        tout = A.RecordTy(
            tuple(sorted(((self.fresh(), t) for _, t in tout.fields), key=lambda f: f[0].encode()))
        )
        env = dict(tin.fields)
        body = self.block(env, self.rng.randint(0, 3), depth=1)
        body += self.reach(env, dict(tout.fields))
        return A.FunctionDef(f"helper{index}", tin, tout, A.seq_of(body))

    def program(self) -> A.Program:
        if self.budget <= 1:
            return A.Program((), (A.FunctionDef("main", A.UNIT, A.UNIT, A.Noop()),))
        n_helpers = self.rng.randint(0, MAX_HELPERS) if self.budget > 8 else 0
        for k in range(n_helpers):
            self.helpers.append(self.helper(k))
        param = self.rand_type(1)
        store = self.rand_record(1, lo=1)
        tin = A.RecordTy((("param", param), ("store", store)))
        tout = A.RecordTy((("operations", A.ListTy(A.OPERATION)), ("store", store)))
        env = dict(tin.fields)
        body: list = []
        spent = 0
        while spent < self.budget - 2:
            instrs = self.step(env, 0)
            body.extend(instrs)
            spent += sum(_size(i) for i in instrs)
        if self.rng.random() < 0.08 and env:
            x = self._pick(env)
            body.append(A.RhsInstr(self._rhs(A.Apply("failwith", A.Var(x)))))
        else:
            target = {"store": store}
            s = self._pick(env, lambda t: t == store)
            if s is not None and s != "store":
                if "store" in env:
                    body.append(A.Drop("store"))
                    del env["store"]
                env.pop(s)
                env["store"] = store
                body.append(A.Assign(A.Var("store"), self._rhs(A.ArgRhs(A.Var(s)))))
            body += self.reach(env, target)
            nil = A.ListVal((), A.OPERATION)
            body.append(A.Assign(A.Var("operations"), self._rhs(A.ArgRhs(A.Val(nil)))))
        main = A.FunctionDef("main", tin, tout, A.seq_of(body))
        return A.Program((), (*self.helpers, main))


def _size(i) -> int:
    """Rough AST node count of an instruction."""
    match i:
        case A.Seq(a, b):
            return _size(a) + _size(b)
        case A.MatchInstr(_, branches):
            return 1 + sum(1 + _size(b) for _, _, b in branches)
        case A.Assign(_, A.MatchRhs(_, branches)):
            return 2 + 2 * len(branches)
        case A.Assign(A.RecordPat(fields), _) | A.Assign(_, A.ArgRhs(A.RecordArg(fields))):
            return 2 + len(fields)
    return 2


def generate_program(seed: int, budget: int = 40) -> A.Program:
    """A random well-typed program; deterministic in (seed, budget)."""
    if budget < 1:
        raise ValueError("size budget must be at least 1")
    return Generator(seed, budget).program()


def generate_with_stats(seed: int, budget: int = 40) -> tuple[A.Program, GenStats]:
    g = Generator(seed, budget)
    return g.program(), g.stats


def random_input(program: A.Program, seed: int, entry: str | None = None) -> A.RecordVal:
    """A random value of the entry function's input type."""
    fn = program.functions[-1] if entry is None else program.function(entry)
    t = T.normalize_type(fn.input)
    return Generator(seed, 0).rand_value(t)


def random_amount(rng: random.Random) -> int:
    return rng.choice((0, 1, 99, 100, 1000, A.MUTEZ_BOUND - 1, rng.randrange(10**6)))
