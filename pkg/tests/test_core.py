import math

import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyreg.core import (
    ONE,
    Bag,
    EdgeTree,
    Prod,
    Sum,
    TypeMismatch,
    bag_depth,
    bags,
    canonical_value,
    check_value,
    enumerate_values,
    parse_type,
    parse_value,
    show_value,
    tree_from_sexp,
    tree_iso,
    tree_to_sexp,
    tree_to_value,
    value_size,
    value_to_tree,
)
from polyreg.gen import random_tree, random_type, random_value
from polyreg.sexp import SexpError


def test_parse_type_forms():
    assert parse_type("1") == ONE
    assert parse_type("(M (+ 1 (* 1 1)))") == Bag(Sum(ONE, Prod(ONE, ONE)))
    assert bag_depth(parse_type("(M (* (M 1) (M (M 1))))")) == 3
    assert bags(2) == Bag(Bag(ONE))


@pytest.mark.parametrize("src", ["(M)", "(+ 1)", "(Q 1)", "x"])
def test_parse_type_rejects(src):
    with pytest.raises(SexpError):
        parse_type(src)


def test_value_order_is_irrelevant():
    ty = parse_type("(M (+ 1 1))")
    a = parse_value("(bag (inr unit) (inl unit))")
    b = parse_value("(bag (inl unit) (inr unit))")
    assert canonical_value(ty, a) == canonical_value(ty, b)


def test_check_value_rejects_wrong_shape():
    with pytest.raises(TypeMismatch):
        check_value(parse_type("(+ 1 1)"), parse_value("(bag)"))


@pytest.mark.parametrize("m,n", [(1, 4), (2, 3), (3, 2)])
def test_enumerate_counts_multisets(m, n):
    # multisets of size <= n over m letters: C(m + n, n)
    ty = Bag(Sum(ONE, ONE)) if m == 2 else Bag(ONE) if m == 1 else Bag(Sum(ONE, Sum(ONE, ONE)))
    assert len(enumerate_values(ty, n)) == math.comb(m + n, n)


def test_value_size_counts_elements():
    assert value_size(parse_value("(bag unit unit)")) == 3
    assert value_size(parse_value("(pair unit (bag))")) == 2


@given(st.randoms(use_true_random=False))
def test_show_parse_roundtrip(rng):
    ty = random_type(rng, 3, 2)
    v = random_value(rng, ty, 3, [10])
    assert canonical_value(ty, parse_value(show_value(v))) == canonical_value(ty, v)
    assert parse_type(str(ty)) == ty


@given(st.randoms(use_true_random=False))
def test_canonical_is_idempotent(rng):
    ty = random_type(rng, 3, 2)
    v = canonical_value(ty, random_value(rng, ty, 3, [10]))
    assert canonical_value(ty, v) == v


def _nx_tree(t: EdgeTree) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_node("root", c="root")
    for e, (p, c) in enumerate(zip(t.parent, t.color)):
        g.add_node(e, c=c)
        g.add_edge("root" if p is None else p, e)
    return g


def _shuffled(t: EdgeTree, rng) -> EdgeTree:
    # relabel edges by a random order that keeps parents first
    order, frontier = [], [e for e in range(len(t)) if t.parent[e] is None]
    while frontier:
        e = frontier.pop(rng.randrange(len(frontier)))
        order.append(e)
        frontier += t.children[e]
    new = {old: i for i, old in enumerate(order)}
    return EdgeTree([None if t.parent[o] is None else new[t.parent[o]] for o in order], [t.color[o] for o in order])


@given(st.randoms(use_true_random=False))
def test_tree_iso_matches_networkx(rng):
    a = random_tree(rng, 3, "ab", 3, 8)
    b = random_tree(rng, 3, "ab", 3, 8) if rng.random() < 0.5 else _shuffled(a, rng)
    match = nx.algorithms.isomorphism.categorical_node_match("c", None)
    assert tree_iso(a, b) == nx.is_isomorphic(_nx_tree(a), _nx_tree(b), node_match=match)


@given(st.randoms(use_true_random=False))
def test_tree_sexp_roundtrip(rng):
    t = random_tree(rng, 3, "abc", 3, 10)
    assert tree_from_sexp(tree_to_sexp(t)) == t


@given(st.randoms(use_true_random=False))
def test_tree_value_roundtrip(rng):
    t = random_tree(rng, 3, ["*"], 3, 10)
    assert value_to_tree(tree_to_value(t, 3), 3) == t


def test_tree_too_high():
    t = EdgeTree([None, 0, 1], ["*"] * 3)
    with pytest.raises(TypeMismatch):
        tree_to_value(t, 2)
