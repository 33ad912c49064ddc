import random

import pytest

from albert import types as T
from albert.errors import AlbertTypeError, TypeErrorKind as K
from albert.fuzz import generate_program
from albert.syntax import ast as A
from albert.syntax import parse_program
from albert.typer import (
    check_exhaustive,
    dump_typed,
    typecheck_instruction,
    typecheck_lhs,
    typecheck_program,
    typecheck_rhs,
)

STORAGE = A.RecordTy((("threshold", A.MUTEZ), ("votes", A.MapTy(A.STRING, A.NAT))))
M = A.MapTy(A.STRING, A.NAT)


def instr(src: str):
    return parse_program(f"def f : {{}} -> {{}} = {src}").functions[0].body


def rhs(src: str):
    return instr(f"x = {src}").rhs


def kind_of(src: str) -> K:
    with pytest.raises(AlbertTypeError) as exc:
        typecheck_program(parse_program(src))
    return exc.value.kind


def test_voting_signature(voting_typed):
    gv = voting_typed.function("guarded_vote")
    assert gv.input == A.RecordTy((("param", A.STRING), ("store", STORAGE)))
    assert gv.body.env_in == gv.input and gv.body.env_out == gv.output


def test_noop_function():
    tp = typecheck_program(parse_program("def f : {} -> {} = noop"))
    assert tp.function("f").body.env_out == A.UNIT


def test_drop_with_frame():
    env = A.RecordTy((("param", A.STRING), ("store", STORAGE)))
    _, out = typecheck_instruction(env, instr("drop param"))
    assert out == A.RecordTy((("store", STORAGE),))


def test_dup_into_pair_pattern():
    _, out = typecheck_instruction(A.record_ty(state=M), instr("(state0, state1) = dup state"))
    assert out == A.record_ty(state0=M, state1=M)


def test_drop_unbound():
    with pytest.raises(AlbertTypeError) as exc:
        typecheck_instruction(A.UNIT, instr("drop x"))
    assert exc.value.kind is K.UnboundVariable


def test_rhs_examples():
    env = A.record_ty(store0=STORAGE)
    consumed, ty = typecheck_rhs(env, rhs("store0.threshold"))
    assert consumed == env and ty == A.MUTEZ
    consumed, ty = typecheck_rhs(A.record_ty(postvote=A.NAT), rhs("Some postvote"))
    assert ty == A.OptionTy(A.NAT)
    consumed, ty = typecheck_rhs(A.record_ty(am=A.MUTEZ, t=A.MUTEZ), rhs("am >= t"))
    assert ty == A.BOOL and consumed.labels() == ("am", "t")


def test_literal_consumes_nothing():
    consumed, ty = typecheck_rhs(A.record_ty(a=A.NAT), rhs("5"))
    assert consumed == A.UNIT and ty == A.NAT


def test_update_consumes_sources():
    env = A.record_ty(r=A.record_ty(a=A.NAT, b=A.STRING), y=A.NAT, z=A.INT)
    consumed, ty = typecheck_rhs(env, rhs("{r with a = y}"))
    assert consumed.labels() == ("r", "y") and ty == env.get("r")


def test_lhs_examples():
    lhs = instr("{votes = state; threshold = threshold} = s").lhs
    assert typecheck_lhs(STORAGE, lhs) == A.record_ty(state=M, threshold=A.MUTEZ)
    assert typecheck_lhs(A.NAT, A.Var("x")) == A.record_ty(x=A.NAT)
    with pytest.raises(AlbertTypeError) as exc:
        typecheck_lhs(A.record_ty(a=A.NAT, b=A.NAT), A.RecordPat((("a", "x"),)))
    assert exc.value.kind is K.TypeMismatch


def test_exhaustiveness():
    b = T.variant_view(A.BOOL)
    check_exhaustive(b, ["True", "False"])
    with pytest.raises(AlbertTypeError) as exc:
        check_exhaustive(b, ["True"])
    assert exc.value.kind is K.NonExhaustiveMatch and "False" in str(exc.value)
    with pytest.raises(AlbertTypeError) as exc:
        check_exhaustive(b, ["True", "True", "False"])
    assert exc.value.kind is K.DuplicateBranch


# ------------------------------------------------------ rejection fixtures

USE_TWICE = "def f : {x : nat} -> {y : nat; z : nat} = y = x; z = x"
LEFTOVER = "def f : {x : nat; y : nat} -> {x : nat} = noop"
NON_EXHAUSTIVE = "def f : {b : bool} -> {} = match b with | True t -> drop t end"
DUPLICATE = "def f : {b : bool} -> {} = match b with | True t -> drop t | True u -> drop u | False v -> drop v end"

REJECTIONS = [
    (USE_TWICE, K.UnboundVariable),
    (LEFTOVER, K.LinearityLeftover),
    (NON_EXHAUSTIVE, K.NonExhaustiveMatch),
    (DUPLICATE, K.DuplicateBranch),
    ("def f : {} -> {} = x = g {}", K.UnknownFunction),
    ("def f : {x : nat} -> {x : nat} = y = 1; x = y", K.VariableAlreadyBound),
    ("def f : {x : nat} -> {y : nat} = y = C x : [D : nat]", K.UnknownConstructor),
    ("def f : {x : nat} -> {y : int} = y = x", K.TypeMismatch),
    ("def f : {x : nat; s : string} -> {y : nat} = y = x + s", K.TypeMismatch),
    ("def f : {x : string} -> {y : string} = (a, b) = dup x; y = a", K.LinearityLeftover),
]


@pytest.mark.parametrize("src,kind", REJECTIONS)
def test_rejections(src, kind):
    assert kind_of(src) is kind


def test_use_twice_message_mentions_linearity():
    with pytest.raises(AlbertTypeError) as exc:
        typecheck_program(parse_program(USE_TWICE))
    assert "linear" in str(exc.value)
    # the error points at the second use
    assert exc.value.pos == (1, USE_TWICE.rindex("x") + 1)


def test_failwith_branch_unifies():
    src = """def f : {b : bool; x : nat} -> {x : nat} =
      match b with | True t -> drop t | False u -> failwith "no" end"""
    typecheck_program(parse_program(src))


def test_match_branches_must_agree():
    src = """def f : {b : bool; x : nat} -> {x : nat} =
      match b with | True t -> drop t | False u -> drop u; drop x; x = 1 end"""
    typecheck_program(parse_program(src))
    src = """def f : {b : bool; x : nat} -> {x : nat} =
      match b with | True t -> drop t | False u -> drop u; drop x; x = (1 : int) end"""
    assert kind_of(src) is K.TypeMismatch


def test_no_code_after_failure():
    assert kind_of('def f : {} -> {} = failwith "x"; noop') is K.TypeMismatch


def test_dump_format(voting_typed):
    text = dump_typed(voting_typed)
    line = next(l for l in text.splitlines() if "drop t" in l)
    assert line.strip() == "{param : string; store1 : {threshold : mutez; votes : map string nat}; t : {}} ⊢ drop t ⊣ {param : string; store1 : {threshold : mutez; votes : map string nat}}"
    assert "⊣ <failed>" in text


# ------------------------------------------------------------ frame law


def _walk(ti):
    yield ti
    for c in ti.children:
        yield from _walk(c)


def test_frame_weakening_random():
    """Adding unused bindings around any typed instruction threads them through."""
    rng = random.Random(1)
    checked = 0
    seed = 0
    while checked < 600:
        p = generate_program(seed, 30)
        seed += 1
        tp = typecheck_program(p)
        helpers = tp.functions[:-1]
        for ti in _walk(tp.functions[-1].body):
            if rng.random() > 0.3:
                continue
            extra = A.RecordTy(
                tuple((f"qframe{k}", rng.choice([A.NAT, A.STRING, A.OptionTy(A.INT)])) for k in range(rng.randint(1, 3)))
            )
            framed, out = typecheck_instruction(T.join(ti.env_in, extra), ti.node, helpers)
            if ti.env_out is None:
                assert out is None
            else:
                assert out == T.join(ti.env_out, extra)
            checked += 1
    assert checked >= 500


def test_typing_is_deterministic():
    for seed in range(20):
        p = generate_program(seed, 40)
        assert typecheck_program(p) == typecheck_program(p)
