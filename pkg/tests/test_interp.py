import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyreg.calculus import Map, choices, comp, eval_term, ident, pi1, typecheck
from polyreg.core import ONE, Bag, canonical_value, parse_type, parse_value
from polyreg.gen import random_term, random_type, random_value
from polyreg.interp import (
    InterpError,
    apply_interp,
    apply_to_value,
    compile_term,
    compose_interp,
    identity_interp,
    parse_interp,
    show_interp,
)
from polyreg.logic import struct_of_value, value_of_struct, voc_of

T, P = parse_type, parse_value

# one component for the outer items, one for pairs (item, other item);
# the second coordinate ranges over the input minus the chosen element
CHOICES = """
(interpretation
  (input-type (M 1))
  (output-type (M (* 1 (M 1))))
  (component root :dim 1 :vars (r) :universe (not (rel sim:ε r r)))
  (component item :dim 1 :vars (a) :universe (rel sim:ε a a))
  (component rest :dim 2 :vars (a b) :universe (and (rel sim:ε a a) (not (rel sim:ε a b))))
  (relation prod:m (item) :vars (x) true)
  (relation sim:m2 (rest rest) :vars (a b c d) (and (= a c) (rel sim:ε b d)))
  (relation sim:ε (item item) :vars (x y) (rel sim:ε x y))
  (relation sim:ε (item rest) :vars (x a b) (rel sim:ε x a))
  (relation sim:ε (rest item) :vars (a b x) (rel sim:ε a x))
  (relation sim:ε (rest rest) :vars (a b c d) (= a c)))
"""


def _same(ty, a, b):
    return canonical_value(ty, a) == canonical_value(ty, b)


def test_identity_interp():
    ty = T("(M (* 1 (M (+ 1 1))))")
    v = P("(bag (pair unit (bag (inl unit) (inr unit))) (pair unit (bag)))")
    f = identity_interp(voc_of(ty))
    assert _same(ty, apply_to_value(f, ty, ty, v), v)


def test_choices_by_hand():
    f = parse_interp(CHOICES)
    out = apply_to_value(f, T("(M 1)"), T("(M (* 1 (M 1)))"), P("(bag unit unit)"))
    assert _same(T("(M (* 1 (M 1)))"), out, P("(bag (pair unit (bag unit)) (pair unit (bag unit)))"))


def test_choices_then_first_projection():
    f = compose_interp(compile_term(choices(ONE)), compile_term(Map(pi1(ONE, Bag(ONE)))))
    assert _same(T("(M 1)"), apply_to_value(f, T("(M 1)"), T("(M 1)"), P("(bag unit unit)")), P("(bag unit unit)"))


def test_compile_identity():
    ty = T("(+ 1 (M 1))")
    f = compile_term(ident(ty))
    for v in ["(inl unit)", "(inr (bag unit unit))"]:
        assert _same(ty, apply_to_value(f, ty, ty, P(v)), P(v))


def test_text_roundtrip():
    f = compile_term(comp(choices(ONE), Map(pi1(ONE, Bag(ONE)))))
    g = parse_interp(show_interp(f))
    v = P("(bag unit unit unit)")
    assert _same(T("(M 1)"), apply_to_value(g, T("(M 1)"), T("(M 1)"), v), v)


def test_empty_output_rejected():
    f = parse_interp(
        "(interpretation (input-type (M 1)) (output-type 1) (component c :dim 1 :vars (x) :universe false))"
    )
    with pytest.raises(InterpError):
        apply_interp(f, struct_of_value(T("(M 1)"), P("(bag)")))


@given(st.randoms(use_true_random=False))
def test_compile_is_sound(rng):
    t = random_term(rng, random_type(rng, 3, 2), 4)
    d, c = typecheck(t)
    v = random_value(rng, d, 4, [10])
    assert _same(c, apply_to_value(compile_term(t), d, c, v), eval_term(t, v))


@given(st.randoms(use_true_random=False))
def test_composition_matches_sequencing(rng):
    dom = random_type(rng, 2, 2)
    t1 = random_term(rng, dom, 3)
    mid = typecheck(t1)[1]
    t2 = random_term(rng, mid, 3)
    cod = typecheck(t2)[1]
    v = random_value(rng, dom, 3, [8])
    f = compose_interp(compile_term(t1), compile_term(t2))
    assert _same(cod, apply_to_value(f, dom, cod, v), eval_term(t2, eval_term(t1, v)))


@given(st.randoms(use_true_random=False))
def test_compose_with_identity(rng):
    t = random_term(rng, random_type(rng, 2, 2), 3)
    d, c = typecheck(t)
    f = compile_term(t)
    v = random_value(rng, d, 3, [8])
    want = apply_to_value(f, d, c, v)
    left = compose_interp(identity_interp(voc_of(d)), f)
    right = compose_interp(f, identity_interp(voc_of(c)))
    assert _same(c, apply_to_value(left, d, c, v), want)
    assert _same(c, apply_to_value(right, d, c, v), want)
    assert _same(c, value_of_struct(c, apply_interp(f, struct_of_value(d, v))), want)
