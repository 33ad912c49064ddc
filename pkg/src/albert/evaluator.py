"""Big-step reference interpreter for typechecked Albert programs.

The runtime environment is a dict from variable names to values.  Each
instruction consumes the variables its right-hand side reads (they are popped
from the dict) and binds its results; everything else passes through
untouched, which is the frame rule read algorithmically.  Failures
(``failwith``, ``assert_some`` on None, mutez overflow) raise ContractFailure.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import types as T
from .errors import ContractFailure, EvalError
from .syntax import ast as A
from .typer import TypedInstr, TypedProgram

OVERFLOW_PAYLOAD = A.StringVal("mutez overflow")
ASSERT_SOME_PAYLOAD = A.StringVal("assert_some")
DEFAULT_MAX_STEPS = 10**7


@dataclass
class EvalContext:
    amount: int = 0
    max_steps: int = DEFAULT_MAX_STEPS
    debug: bool = False
    steps: int = 0


def env_value(env: dict) -> A.RecordVal:
    return A.RecordVal(tuple(sorted(env.items(), key=lambda kv: kv[0].encode())))


class Evaluator:
    def __init__(self, program: TypedProgram, ctx: EvalContext):
        self.program = program
        self.ctx = ctx

    # ------------------------------------------------------------- values

    def _take(self, env: dict, name: str) -> A.Value:
        try:
            return env.pop(name)
        except KeyError:
            raise EvalError(f"variable {name} missing at runtime") from None

    def arg(self, env: dict, a) -> A.Value:
        match a:
            case A.Var(x):
                return self._take(env, x)
            case A.Val(v):
                return v
            case A.RecordArg(fields):
                return env_value({l: self._take(env, x) for l, x in fields})
        raise EvalError(f"bad argument {a!r}")

    # ---------------------------------------------------------------- rhs

    def rhs(self, env: dict, r) -> A.Value:
        """Evaluate ``r``, popping the variables it consumes from ``env``."""
        match r:
            case A.ArgRhs(a):
                return self.arg(env, a)
            case A.Apply(f, a):
                return self.apply(f, self.arg(env, a))
            case A.Proj(x, l):
                v = self._take(env, x).get(l)
                if v is None:
                    raise EvalError(f"record {x} has no field {l}")
                return v
            case A.Update(x, fields):
                rec = self._take(env, x)
                new = dict(rec.fields)
                for l, y in fields:
                    new[l] = self._take(env, y)
                return env_value(new)
            case A.Construct(c, a, annot):
                return construct(c, self.arg(env, a), annot)
            case A.BinOp(op, x, y):
                return binop(op, self._take(env, x), self._take(env, y))
            case A.MapUpdate(m, k, v):
                return map_update(self._take(env, m), self._take(env, k), self._take(env, v))
            case A.MatchRhs(x, branches):
                c, payload = destruct(self._take(env, x))
                for bc, binder, body in branches:
                    if bc == c:
                        env[binder] = payload
                        return self.rhs(env, body)
                raise EvalError(f"no branch for constructor {c}")
        raise EvalError(f"unknown rhs {r!r}")

    def apply(self, f: str, v: A.Value) -> A.Value:
        match f:
            case "dup":
                return A.RecordVal((("car", v), ("cdr", v)))
            case "amount":
                return A.MutezVal(self.ctx.amount)
            case "failwith":
                raise ContractFailure(v)
            case "assert_some":
                opt = v.get("opt")
                if isinstance(opt, A.NoneVal):
                    raise ContractFailure(ASSERT_SOME_PAYLOAD)
                return A.RecordVal((("res", opt.payload),))
        fn = self.program.function(f)
        out = self.instruction(dict(v.fields), fn.body)
        return env_value(out)

    # -------------------------------------------------------- instructions

    def instruction(self, env: dict, ti: TypedInstr) -> dict:
        self.ctx.steps += 1
        if self.ctx.steps > self.ctx.max_steps:
            raise EvalError("step budget exhausted")
        if self.ctx.debug:
            _check_shape(env, ti.env_in, "input")
        node = ti.node
        match node:
            case A.Noop():
                pass
            case A.Seq():
                first, second = ti.children
                env = self.instruction(env, first)
                env = self.instruction(env, second)
            case A.Drop(x):
                self._take(env, x)
            case A.Assign(lhs, r):
                v = self.rhs(env, r)
                match lhs:
                    case A.Var(x):
                        env[x] = v
                    case A.RecordPat(fields):
                        for l, x in fields:
                            env[x] = v.get(l)
            case A.RhsInstr(r):
                env.update(self.rhs(env, r).fields)
            case A.MatchInstr(x, branches):
                c, payload = destruct(self._take(env, x))
                for (bc, binder, _), body in zip(branches, ti.children):
                    if bc == c:
                        env[binder] = payload
                        env = self.instruction(env, body)
                        break
                else:
                    raise EvalError(f"no branch for constructor {c}")
            case _:
                raise EvalError(f"unknown instruction {node!r}")
        if self.ctx.debug:
            _check_shape(env, ti.env_out, "output")
        return env


def _check_shape(env: dict, ty, which: str) -> None:
    if ty is None:
        raise EvalError(f"reached the {which} of an instruction typed as failing")
    if not T.check_value(env_value(env), ty):
        raise EvalError(f"runtime {which} environment does not inhabit the annotated type")


# ------------------------------------------------------------ primitives


def construct(c: str, payload: A.Value, annot) -> A.Value:
    match annot:
        case None | A.OptionTy():
            if c == "Some":
                return A.SomeVal(payload)
            return A.NoneVal(annot.elem)
        case A.Prim("bool"):
            return A.BoolVal(c == "True")
    return A.VariantVal(c, payload, annot)


def destruct(v: A.Value) -> tuple[str, A.Value]:
    """Constructor name and payload of a variant-like value."""
    match v:
        case A.VariantVal(c, payload, _):
            return c, payload
        case A.BoolVal(b):
            return ("True" if b else "False"), A.RecordVal(())
        case A.NoneVal():
            return "None", A.RecordVal(())
        case A.SomeVal(payload):
            return "Some", payload
    raise EvalError(f"cannot match on {v!r}")


def binop(op: str, a: A.Value, b: A.Value) -> A.Value:
    match op, a, b:
        case "add", A.MutezVal(x), A.MutezVal(y):
            if x + y >= A.MUTEZ_BOUND:
                raise ContractFailure(OVERFLOW_PAYLOAD)
            return A.MutezVal(x + y)
        case "add", A.NatVal(x), A.NatVal(y):
            return A.NatVal(x + y)
        case "add", A.IntVal(x), A.IntVal(y):
            return A.IntVal(x + y)
        case "ge", _, _:
            return A.BoolVal(A.compare_values(a, b) >= 0)
        case "mapget", A.MapVal(), _:
            got = a.lookup(b)
            return A.NoneVal(a.val_ty) if got is None else A.SomeVal(got)
    raise EvalError(f"bad operands for {op}: {a!r}, {b!r}")


def map_update(m: A.MapVal, k: A.Value, v: A.Value) -> A.MapVal:
    entries = [(kk, vv) for kk, vv in m.entries if kk != k]
    if isinstance(v, A.SomeVal):
        entries.append((k, v.payload))
        entries.sort(key=lambda kv: A.sort_key(kv[0]))
    return A.MapVal(tuple(entries), m.key_ty, m.val_ty)


# ------------------------------------------------------------------ API


def eval_function(
    p: TypedProgram,
    name: str,
    input: A.Value,
    amount: int = 0,
    max_steps: int = DEFAULT_MAX_STEPS,
    debug: bool = False,
) -> A.Value:
    """Run function ``name`` on ``input``; raises ContractFailure on rejection."""
    fn = p.function(name)
    if not T.check_value(input, fn.input):
        raise TypeError(f"input does not inhabit {name}'s input type")
    ev = Evaluator(p, EvalContext(amount, max_steps, debug))
    return env_value(ev.instruction(dict(input.fields), fn.body))


def eval_instruction(env: A.RecordVal, ti: TypedInstr, program: TypedProgram | None = None, amount: int = 0):
    """Run one typed instruction on a runtime environment record."""
    ev = Evaluator(program or TypedProgram(()), EvalContext(amount, debug=True))
    return env_value(ev.instruction(dict(env.fields), ti))


def eval_rhs(env: A.RecordVal, r, program: TypedProgram | None = None, amount: int = 0) -> A.Value:
    ev = Evaluator(program or TypedProgram(()), EvalContext(amount))
    return ev.rhs(dict(env.fields), r)
