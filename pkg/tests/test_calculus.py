
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyreg.calculus import (
    Map,
    TypeCheckError,
    choices,
    comp,
    desingleton,
    eval_term,
    ident,
    parse_term,
    show_term,
    typecheck,
    union,
)
from polyreg.core import ONE, Bag, Prod, Sum, boolv, canonical_value, parse_type, parse_value
from polyreg.derived import derive
from polyreg.gen import random_term, random_type, random_value

T, P = parse_type, parse_value


def test_parse_union_prime():
    t = parse_term("(union (M 1))")
    assert typecheck(t) == (Bag(Bag(Bag(ONE))), Bag(Bag(ONE)))


def test_parse_accepts_ill_typed():
    t = parse_term("(comp (choices 1) (union (* 1 (M 1))))")
    with pytest.raises(TypeCheckError):
        typecheck(t)


def test_pair_of_projections():
    t = parse_term("(pair (pi1 1 1) (pi2 1 1))")
    assert typecheck(t) == (Prod(ONE, ONE), Prod(ONE, ONE))


def test_prime_types():
    assert typecheck(choices(ONE)) == (Bag(ONE), Bag(Prod(ONE, Bag(ONE))))
    s = T("(+ 1 1)")
    assert typecheck(desingleton(s)) == (Bag(s), Sum(ONE, s))
    with pytest.raises(TypeCheckError):
        typecheck(comp(ident(ONE), union(ONE)))


def test_eval_choices():
    assert eval_term(choices(ONE), P("(bag unit unit)")) == P("(bag (pair unit (bag unit)) (pair unit (bag unit)))")


def test_eval_union():
    assert eval_term(union(ONE), P("(bag (bag unit) (bag unit unit))")) == P("(bag unit unit unit)")


def test_eval_desingleton():
    assert eval_term(desingleton(ONE), P("(bag)")) == P("(inl unit)")
    assert eval_term(desingleton(ONE), P("(bag unit)")) == P("(inr unit)")
    assert eval_term(desingleton(ONE), P("(bag unit unit)")) == P("(inl unit)")


def test_eval_strength():
    st_ = derive("strength", [ONE, Bag(ONE)])
    out = eval_term(st_, P("(pair (bag unit unit) (bag unit))"))
    assert out == P("(bag (pair unit (bag unit)) (pair unit (bag unit)))")


def test_eval_empty_test():
    e = derive("empty_test")
    assert eval_term(e, P("(bag)")) == boolv(True)
    assert eval_term(e, P("(bag unit)")) == boolv(False)


def test_eval_rejects_ill_typed_input():
    with pytest.raises(Exception):
        eval_term(union(ONE), P("(bag unit)"))


@given(st.randoms(use_true_random=False))
def test_show_parse_roundtrip(rng):
    t = random_term(rng, random_type(rng, 3, 2), 4)
    assert parse_term(show_term(t)) == t


@given(st.randoms(use_true_random=False))
def test_output_inhabits_codomain(rng):
    t = random_term(rng, random_type(rng, 3, 2), 4)
    d, c = typecheck(t)
    v = random_value(rng, d, 4, [10])
    canonical_value(c, eval_term(t, v))


@given(st.randoms(use_true_random=False))
def test_map_is_functorial(rng):
    s = random_type(rng, 2, 1)
    f = random_term(rng, s, 3)
    g = random_term(rng, typecheck(f)[1], 3)
    c = typecheck(g)[1]
    v = random_value(rng, Bag(s), 4, [10])
    lhs = eval_term(comp(Map(f), Map(g)), v)
    rhs = eval_term(Map(comp(f, g)), v)
    assert canonical_value(Bag(c), lhs) == canonical_value(Bag(c), rhs)
