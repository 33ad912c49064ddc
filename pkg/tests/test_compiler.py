import random

import pytest

from albert import types as T
from albert.compiler import (
    compile_contract,
    compile_function,
    compile_instruction,
    compile_type,
    compile_value,
    decode_value,
)
from albert.errors import AlbertTypeError, ContractFailure, MichFailure
from albert.evaluator import eval_function
from albert.fuzz import generate_program, random_input
from albert.fuzz.generator import Generator
from albert.michelson import FAILED, I, mtc_interpret, mtc_typecheck, print_michelson, run_contract
from albert.michelson import core as M
from albert.syntax import ast as A
from albert.syntax import parse_program, parse_type
from albert.typer import typecheck_instruction, typecheck_program

from conftest import GOLDEN

STORAGE = A.RecordTy((("threshold", A.MUTEZ), ("votes", A.MapTy(A.STRING, A.NAT))))


# ------------------------------------------------------------------ types


def test_compile_type_examples():
    assert compile_type(STORAGE) == M.pair(M.T_MUTEZ, M.map_(M.T_STRING, M.T_NAT))
    assert compile_type(A.UNIT) == M.T_UNIT
    v = T.normalize_type(parse_type("[A : nat | B : string | C : {}]"))
    assert compile_type(v) == M.or_(M.T_NAT, M.or_(M.T_STRING, M.T_UNIT))
    assert compile_type(A.record_ty(only=A.INT)) == M.T_INT
    assert compile_type(A.VariantTy((("K", A.NAT),))) == M.T_NAT
    assert compile_type(A.BOOL) == M.T_BOOL
    assert compile_type(A.OptionTy(A.UNIT)) == M.option(M.T_UNIT)
    r = T.normalize_type(parse_type("{d : nat; c : int; b : string; a : bool}"))
    assert compile_type(r) == M.pair(M.T_BOOL, M.pair(M.T_STRING, M.pair(M.T_INT, M.T_NAT)))


# ----------------------------------------------------------------- values


def test_compile_value_examples():
    v = A.record_val(threshold=A.MutezVal(100), votes=A.MapVal(((A.StringVal("yes"), A.NatVal(0)),), A.STRING, A.NAT))
    assert compile_value(v, STORAGE) == M.Pair(M.Mutez(100), M.MapV(((M.String("yes"), M.Nat(0)),)))
    assert compile_value(A.RecordVal(()), A.UNIT) == M.Unit()
    t = A.VariantTy((("A", A.NAT), ("B", A.NAT), ("C", A.NAT)))
    assert compile_value(A.VariantVal("B", A.NatVal(4), t), t) == M.Right(M.Left(M.Nat(4)))


def _expected_position(i: int, n: int, payload):
    """Comb injection written out by hand: i Rights, then a Left unless last."""
    out = payload if i == n - 1 else M.Left(payload)
    for _ in range(i):
        out = M.Right(out)
    return out


def test_constructor_positions_brute_force():
    for n in range(1, 5):
        ctors = tuple((c, A.NAT) for c in "ABCD"[:n])
        t = A.VariantTy(ctors)
        for i, (c, _) in enumerate(ctors):
            m = compile_value(A.VariantVal(c, A.NatVal(i), t), t)
            if n == 1:
                assert m == M.Nat(i)
            else:
                assert m == _expected_position(i, n, M.Nat(i))
            assert M.typecheck_value(m, compile_type(t))
            assert decode_value(m, t) == A.VariantVal(c, A.NatVal(i), t)


def test_value_round_trip_random():
    """decode . compile = id on values, compile . decode = id on encodings."""
    n = 0
    for seed in range(1500):
        g = Generator(seed, 0)
        t = T.normalize_type(g.rand_type(0))
        v = g.rand_value(t)
        m = compile_value(v, t)
        assert M.typecheck_value(m, compile_type(t))
        back = decode_value(m, t)
        assert back == v
        assert compile_value(back, t) == m
        n += 1
    assert n >= 1000


def test_decode_rejects_mismatched_values():
    with pytest.raises(TypeError):
        decode_value(M.String("x"), A.NAT)
    with pytest.raises(TypeError):
        compile_value(A.NatVal(1), A.STRING)


# --------------------------------------------------------------- contract


def test_voting_contract_types(voting_typed):
    script = compile_contract(voting_typed, "guarded_vote")
    assert script.parameter == M.T_STRING
    assert script.storage == M.pair(M.T_MUTEZ, M.map_(M.T_STRING, M.T_NAT))
    out = mtc_typecheck(script.code, (M.pair(script.parameter, script.storage),))
    assert out == (M.pair(M.list_(M.T_OPERATION), script.storage),)


def test_voting_golden(voting_typed):
    text = print_michelson(compile_contract(voting_typed, "guarded_vote"))
    assert text == (GOLDEN / "voting.tz").read_text()


def test_helper_is_inlined_not_emitted(voting_typed):
    vote = compile_function(voting_typed, "vote")
    script = compile_contract(voting_typed, "guarded_vote")
    if_instr = next(i for i in script.code if i.op == "IF")
    true_branch = if_instr.args[0]
    # the helper's block appears verbatim inside the True arm
    k = len(vote)
    assert any(true_branch[j:j + k] == vote for j in range(len(true_branch) - k + 1))


def test_minimal_contract():
    src = """def main : {param : {}; store : nat} -> {operations : list operation; store : nat} =
      drop param; operations = ([] : list operation)"""
    tp = typecheck_program(parse_program(src))
    script = compile_contract(tp, "main")
    assert script.parameter == M.T_UNIT
    for n in (0, 5):
        assert run_contract(script, M.Unit(), M.Nat(n)) == (M.ListV(()), M.Nat(n))


@pytest.mark.parametrize(
    "sig",
    [
        "{param : nat; store : nat} -> {store : nat}",
        "{param : nat; store : nat} -> {operations : list operation; store : int}",
        "{p : nat; store : nat} -> {operations : list operation; store : nat}",
    ],
)
def test_calling_convention_violations_rejected(sig):
    src = f"def main : {sig} = failwith \"x\""
    tp = typecheck_program(parse_program(src))
    with pytest.raises(AlbertTypeError):
        compile_contract(tp, "main")


# ------------------------------------------------------------ instructions


def _stack_type(layout, env):
    return tuple(compile_type(env.get(n)) for n in layout)


def instr(src):
    return parse_program(f"def f : {{}} -> {{}} = {src}").functions[0].body


def test_compile_drop():
    env = A.record_ty(a=A.NAT, t=A.UNIT)
    ti, _ = typecheck_instruction(env, instr("drop t"))
    code, layout = compile_instruction(["a", "t"], ti)
    assert code == (I("DIG", 1), I("DROP"))
    assert layout == ["a"]


def test_compile_projection():
    env = A.record_ty(param=A.STRING, store0=STORAGE)
    ti, _ = typecheck_instruction(env, instr("threshold = store0.threshold"))
    code, layout = compile_instruction(["param", "store0"], ti)
    assert code == (I("DIG", 1), I("CAR"), I("DUG", 1))
    assert layout == ["param", "threshold"]


def test_compile_bool_match():
    env = A.record_ty(ok=A.BOOL, x=A.NAT)
    src = "match ok with | False f -> drop f; drop x; x = 0 | True t -> drop t end"
    ti, _ = typecheck_instruction(env, instr(src))
    code, layout = compile_instruction(["ok", "x"], ti)
    assert code[-1].op == "IF"
    assert layout == ["x"]
    for b, want in ((True, 7), (False, 0)):
        assert mtc_interpret(code, (M.Bool(b), M.Nat(7))) == (M.Nat(want),)


def test_compile_assert_some():
    env = A.record_ty(o=A.OptionTy(A.NAT))
    ti, _ = typecheck_instruction(env, instr("{res = r} = assert_some {opt = o}"))
    code, layout = compile_instruction(["o"], ti)
    assert I("IF_NONE", [I("PUSH", M.T_STRING, M.String("assert_some")), I("FAILWITH")], []) in code
    assert mtc_interpret(code, (M.SomeV(M.Nat(3)),)) == (M.Nat(3),)
    with pytest.raises(MichFailure) as exc:
        mtc_interpret(code, (M.NoneV(),))
    assert exc.value.payload == M.String("assert_some")


def test_layout_mismatch_is_an_internal_error():
    ti, _ = typecheck_instruction(A.record_ty(t=A.UNIT), instr("drop t"))
    with pytest.raises(AssertionError):
        compile_instruction(["u"], ti)


def test_layout_discipline_and_type_preservation_per_instruction():
    """Every compiled top-level instruction maps the env_in stack type to the env_out one."""
    checked = 0
    for seed in range(150):
        tp = typecheck_program(generate_program(seed, 40))
        fn = tp.function(tp.names[-1])
        env = fn.input
        for i in A.flatten_seq(fn.body.node):
            ti, out = typecheck_instruction(env, i, tp.functions[:-1])
            layout = list(env.labels())
            code, new_layout = compile_instruction(layout, ti, tp)
            got = mtc_typecheck(code, _stack_type(layout, env))
            if out is None:
                assert new_layout is None and got is FAILED
                break
            assert new_layout == list(out.labels())
            assert new_layout == sorted(new_layout)
            assert got is FAILED or got == _stack_type(new_layout, out)
            env = out
            checked += 1
    assert checked > 1000


def test_type_preservation_on_generated_contracts():
    for seed in range(300):
        tp = typecheck_program(generate_program(seed, 40))
        script = compile_contract(tp, tp.names[-1])
        out = mtc_typecheck(script.code, (M.pair(script.parameter, script.storage),))
        assert out is FAILED or out == (M.pair(M.list_(M.T_OPERATION), script.storage),)


# ---------------------------------------------------------------- inlining

INLINE_CASES = [
    (
        "def f : {a : nat; b : nat} -> {c : nat} = c = a + b",
        "{c = r} = f {a = x; b = y}",
        "a = x; b = y; c = a + b; r = c",
    ),
    (
        "def f : {o : option nat} -> {v : nat; w : nat} = {res = z} = assert_some {opt = o}; (v, w) = dup z",
        "{v = p; w = q} = f {o = s}; r = p + q",
        "o = s; {res = z} = assert_some {opt = o}; (v, w) = dup z; p = v; q = w; r = p + q",
    ),
    (
        "def f : {b : bool} -> {n : nat} = match b with | True t -> drop t; n = 1 | False u -> drop u; n = 2 end",
        "{n = r} = f {b = k}",
        "b = k; match b with | True t -> drop t; n = 1 | False u -> drop u; n = 2 end; r = n",
    ),
]

MAIN_SIG = "{param : {k : bool; s : option nat; x : nat; y : nat}; store : nat} -> {operations : list operation; store : nat}"
PROLOGUE = "{k = k; s = s; x = x; y = y} = param; drop store; "
EPILOGUE = "; operations = ([] : list operation); store = r"


def _drop_unused(body: str) -> str:
    used = {v for v in ("k", "s", "x", "y") if f" {v}" in body.replace("{", " ").replace("=", " ")}
    unused = [v for v in ("k", "s", "x", "y") if v not in used]
    return "".join(f"drop {v}; " for v in unused) + body


@pytest.mark.parametrize("helper,call,inlined", INLINE_CASES)
def test_inlining_matches_substituted_body(helper, call, inlined):
    called = parse_program(f"{helper}\ndef main : {MAIN_SIG} = {PROLOGUE}{_drop_unused(call)}{EPILOGUE}")
    subst = parse_program(f"def main : {MAIN_SIG} = {PROLOGUE}{_drop_unused(inlined)}{EPILOGUE}")
    a = compile_contract(typecheck_program(called), "main")
    b = compile_contract(typecheck_program(subst), "main")
    assert a.parameter == b.parameter and a.storage == b.storage
    rng = random.Random(5)
    pt = typecheck_program(called).function("main").input
    for _ in range(30):
        v = Generator(rng.randrange(10**6), 0).rand_value(T.normalize_type(pt))
        param = compile_value(v.get("param"), pt.get("param"))
        store = compile_value(v.get("store"), pt.get("store"))
        results = []
        for script in (a, b):
            try:
                results.append(run_contract(script, param, store))
            except MichFailure as exc:
                results.append(("failed", exc.payload))
        assert results[0] == results[1]


# ------------------------------------------------------- semantic agreement


def test_voting_scenarios_agree(voting_typed):
    from conftest import voting_input

    script = compile_contract(voting_typed, "guarded_vote")
    fn = voting_typed.function("guarded_vote")
    for param, amount in (("yes", 100), ("yes", 99), ("maybe", 100)):
        v = voting_input(param)
        p = compile_value(v.get("param"), fn.input.get("param"))
        s = compile_value(v.get("store"), fn.input.get("store"))
        try:
            want = ("ok", eval_function(voting_typed, "guarded_vote", v, amount))
        except ContractFailure as exc:
            want = ("failed", compile_value(exc.payload, T.value_type(exc.payload)))
        try:
            ops, st = run_contract(script, p, s, amount)
            got = ("ok", decode_value(M.Pair(ops, st), fn.output))
        except MichFailure as exc:
            got = ("failed", exc.payload)
        assert got == want


def test_compiled_programs_agree_with_evaluator():
    for seed in range(200):
        p = generate_program(seed, 40)
        tp = typecheck_program(p)
        name = tp.names[-1]
        fn = tp.function(name)
        script = compile_contract(tp, name)
        v = random_input(p, seed)
        p_m = compile_value(v.get("param"), fn.input.get("param"))
        s_m = compile_value(v.get("store"), fn.input.get("store"))
        for amount in (0, 100):
            try:
                want = ("ok", eval_function(tp, name, v, amount))
            except ContractFailure as exc:
                want = ("failed", compile_value(exc.payload, T.value_type(exc.payload)))
            try:
                ops, st = run_contract(script, p_m, s_m, amount)
                got = ("ok", decode_value(M.Pair(ops, st), fn.output))
            except MichFailure as exc:
                got = ("failed", exc.payload)
            assert got == want, seed
