
from hypothesis import given
from hypothesis import strategies as st

from polyreg.calculus import comp, eval_term, typecheck
from polyreg.core import ONE, Bag, Prod, Sum, bags, boolv, canonical_value, check_value, parse_type, parse_value
from polyreg.derived import (
    decode,
    derive_formula,
    enc_height,
    encode,
    point_value,
    pointed1,
    pointed_type,
    unpoint_value,
)
from polyreg.gen import random_type, random_value
from polyreg.logic import TRUE_F, abstract_theory, exists, rel, struct_of_value

T, P = parse_type, parse_value


def test_pointed_unit():
    assert pointed_type(ONE, 1) == ONE


def test_pointed_bag():
    s = T("(+ 1 (M 1))")
    assert pointed1(Bag(s)) == Prod(Sum(ONE, pointed1(s)), Bag(s))


def test_formula_term_examples():
    phi = exists("x", rel("sim:ε", "x", "x"))
    term = derive_formula(T("(M 1)"), phi)
    assert eval_term(term, P("(bag)")) == boolv(False)
    assert eval_term(term, P("(bag unit)")) == boolv(True)


def test_true_sentence_is_constant():
    term = derive_formula(T("(M 1)"), TRUE_F)
    assert {eval_term(term, P(v)) for v in ["(bag)", "(bag unit unit)"]} == {boolv(True)}


@given(st.randoms(use_true_random=False))
def test_pointed_roundtrip(rng):
    ty = random_type(rng, 3, 2)
    v = random_value(rng, ty, 3, [8])
    s = struct_of_value(ty, v)
    k = rng.randint(0, 2)
    coords = tuple(rng.choice(s.universe) for _ in range(k))
    pv = point_value(ty, v, coords)
    check_value(pointed_type(ty, k), pv)
    v2, coords2 = unpoint_value(ty, k, pv)
    assert v2 == canonical_value(ty, v)
    # the recovered coordinates may differ only by an automorphism
    assert abstract_theory(ty, v, 2, coords) == abstract_theory(ty, v2, 2, coords2)


@given(st.randoms(use_true_random=False))
def test_encode_decode_roundtrip(rng):
    ty = random_type(rng, 2, 2)
    assert typecheck(encode(ty))[1] == bags(enc_height(ty))
    v = random_value(rng, ty, 3, [8])
    assert canonical_value(ty, eval_term(comp(encode(ty), decode(ty)), v)) == canonical_value(ty, v)


def test_encoding_is_injective():
    from polyreg.core import enumerate_values

    ty = T("(* (+ 1 1) (M 1))")
    codes = {eval_term(encode(ty), v) for v in enumerate_values(ty, 3)}
    assert len(codes) == len(enumerate_values(ty, 3))
