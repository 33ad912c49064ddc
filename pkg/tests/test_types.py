from itertools import combinations, product

import pytest
from hypothesis import given, settings, strategies as st

from albert import types as T
from albert.errors import AlbertTypeError, JoinError
from albert.syntax import ast as A
from albert.syntax import parse_program, parse_type

STORAGE = A.RecordTy((("threshold", A.MUTEZ), ("votes", A.MapTy(A.STRING, A.NAT))))


def test_inline_voting_alias(voting_program):
    p = T.inline_aliases(voting_program)
    assert p.type_aliases == ()
    vote = p.function("vote")
    assert T.normalize_type(vote.input.get("store")) == STORAGE


def test_inline_without_aliases_is_identity():
    p = parse_program("def f : {x : nat} -> {} = drop x")
    assert T.inline_aliases(p) == p


def test_cyclic_aliases_rejected():
    p = parse_program("type a = {x : b}\ntype b = {y : a}\ndef f : {} -> {} = noop")
    with pytest.raises(AlbertTypeError) as exc:
        T.inline_aliases(p)
    assert "recursive" in str(exc.value)


def test_unknown_alias_rejected():
    with pytest.raises(AlbertTypeError):
        T.expand_aliases(A.Alias("nope"), {})


def test_normalize_examples():
    t = parse_type("{votes : map string nat; threshold : mutez}")
    assert T.normalize_type(t) == STORAGE
    assert T.normalize_type(A.UNIT) == A.UNIT
    v = parse_type("[True : {} | False : {}]")
    assert T.normalize_type(v).labels() == ("False", "True")


def test_label_order_is_bytewise():
    # uppercase sorts before lowercase, digits before letters
    t = T.normalize_type(A.RecordTy((("b", A.NAT), ("B", A.NAT), ("a1", A.NAT), ("a", A.NAT), ("_", A.NAT))))
    assert t.labels() == ("B", "_", "a", "a1", "b")


def test_well_formed_examples():
    T.well_formed(STORAGE)
    with pytest.raises(AlbertTypeError):
        T.well_formed(A.RecordTy((("b", A.NAT), ("a", A.NAT))))
    with pytest.raises(AlbertTypeError):
        T.well_formed(A.VariantTy(()))
    with pytest.raises(AlbertTypeError):
        T.well_formed(A.MapTy(A.RecordTy(()), A.NAT))
    with pytest.raises(AlbertTypeError) as exc:
        T.well_formed(A.RecordTy((("a", A.RecordTy((("y", A.NAT), ("x", A.NAT)))),)))
    assert "a" in str(exc.value)


def test_type_equality():
    assert T.type_equal(STORAGE, STORAGE)
    assert not T.type_equal(A.record_ty(a=A.NAT), A.record_ty(a=A.INT))
    a = T.normalize_type(A.RecordTy((("y", A.NAT), ("x", A.NAT))))
    b = T.normalize_type(A.RecordTy((("x", A.NAT), ("y", A.NAT))))
    assert T.type_equal(a, b)


def test_join_examples():
    assert T.join(A.record_ty(x=A.NAT), A.record_ty(y=A.STRING)) == A.record_ty(x=A.NAT, y=A.STRING)
    with pytest.raises(JoinError) as exc:
        T.join(A.record_ty(x=A.NAT), A.record_ty(x=A.INT))
    assert exc.value.label == "x"


# brute force over every environment with labels from a 6-letter alphabet
ALPHABET = ("a", "b", "c", "d", "e", "f")
LEAVES = (A.NAT, A.STRING)


def _envs(max_labels: int):
    for n in range(max_labels + 1):
        for labels in combinations(ALPHABET, n):
            for types in product(LEAVES, repeat=n):
                yield A.RecordTy(tuple(zip(labels, types)))


def _join(a, b):
    try:
        return T.join(a, b)
    except JoinError:
        return None


def test_join_unit_law_brute_force():
    for e in _envs(6):
        assert T.join(e, A.UNIT) == e
        assert T.join(A.UNIT, e) == e


def test_join_commutative_brute_force():
    envs = list(_envs(3))
    for a in envs:
        for b in envs:
            assert _join(a, b) == _join(b, a)


def test_join_associative_brute_force():
    envs = [e for e in _envs(2) if all(t == A.NAT for _, t in e.fields)]
    for a, b, c in product(envs, repeat=3):
        ab, bc = _join(a, b), _join(b, c)
        left = _join(ab, c) if ab is not None else None
        right = _join(a, bc) if bc is not None else None
        assert left == right


def test_join_split_inverse():
    for e in _envs(4):
        for k in range(len(e.fields) + 1):
            for labels in combinations(e.labels(), k):
                taken, rest = T.split(e, labels)
                assert T.join(taken, rest) == e


def _types(depth=2):
    leaf = st.sampled_from([A.NAT, A.INT, A.STRING, A.MUTEZ, A.BOOL])
    labels = st.sampled_from(["a", "b", "c", "X", "_y"])

    def extend(inner):
        rec = st.dictionaries(labels, inner, max_size=3).map(lambda d: A.RecordTy(tuple(d.items())))
        var = st.dictionaries(labels, inner, min_size=1, max_size=3).map(lambda d: A.VariantTy(tuple(d.items())))
        return st.one_of(rec, var, inner.map(A.OptionTy), inner.map(A.ListTy))

    return st.recursive(leaf, extend, max_leaves=8)


@settings(max_examples=300, deadline=None)
@given(_types())
def test_normalize_idempotent_and_well_formed(t):
    n = T.normalize_type(t)
    assert T.normalize_type(n) == n
    assert T.is_well_formed(n)


def _subtypes(t):
    yield t
    match t:
        case A.RecordTy(fs) | A.VariantTy(fs):
            for _, ft in fs:
                yield from _subtypes(ft)
        case A.ListTy(e) | A.OptionTy(e):
            yield from _subtypes(e)
        case A.MapTy(k, v):
            yield from _subtypes(k)
            yield from _subtypes(v)


@settings(max_examples=300, deadline=None)
@given(_types())
def test_well_formedness_is_hereditary(t):
    n = T.normalize_type(t)
    if T.is_well_formed(n):
        assert all(T.is_well_formed(s) for s in _subtypes(n))


def test_variant_views():
    assert T.variant_view(A.BOOL).labels() == ("False", "True")
    assert T.variant_view(A.OptionTy(A.NAT)) == A.VariantTy((("None", A.UNIT), ("Some", A.NAT)))
    assert T.variant_view(A.NAT) is None
