import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from polyreg.core import EdgeTree
from polyreg.gen import random_pattern, random_tree
from polyreg.interp import parse_interp
from polyreg.patterns import Pattern, PatternNode, pattern_apply
from polyreg.symbolic import (
    LEAF,
    Counterexample,
    Equivalent,
    Polynomial,
    SymbolicError,
    distinguishing_params,
    falling_factorial,
    free_symbolic,
    instantiate,
    poly_from_sexp,
    poly_to_sexp,
    qf_equiv,
    stree,
    stree_from_sexp,
    stree_to_sexp,
    symbolic_apply,
    ultimately_positive,
)

x = Polynomial.var("x")


def star(m):
    return EdgeTree([None] * m, ["a"] * m)


def to_sympy(p: Polynomial):
    out = sympy.Integer(0)
    for m, c in p.terms.items():
        term = sympy.Integer(c)
        for v, e in m:
            term *= sympy.Symbol(v) ** e
        out += term
    return sympy.expand(out)


polys = st.dictionaries(
    st.lists(st.tuples(st.sampled_from("xyz"), st.integers(1, 3)), max_size=2, unique_by=lambda ve: ve[0]).map(
        lambda m: tuple(sorted(m))
    ),
    st.integers(-5, 5),
    max_size=4,
).map(Polynomial)


def test_falling_factorial():
    assert falling_factorial(x, 3).evaluate({"x": 5}) == 60
    p = falling_factorial(x, 4) + falling_factorial(x, 2) * 2 + x
    assert p == x * x * x * x - x * x * x * 6 + x * x * 13 - x * 7


def test_ultimately_positive():
    p = x * x - x * 3
    assert ultimately_positive(p)
    assert p.evaluate({"x": 10}) == 70
    assert not ultimately_positive(x * 3 - x * x)


def test_instantiate_examples():
    assert instantiate(stree([("a", 3, LEAF)]), {}) == star(3)
    a = instantiate(stree([("a", x, LEAF)]), {"x": 2})
    b = instantiate(stree([("a", x * x, LEAF)]), {"x": 2})
    assert len(a) == 2 and len(b) == 4 and a != b


def test_four_leaf_symbolic():
    P = Pattern([PatternNode(EdgeTree())] + [PatternNode(star(m), 0, ()) for m in (4, 2, 2, 1)])
    out = symbolic_apply(P, free_symbolic(star(1)))
    ((color, p, sub),) = out.summands
    assert sub == LEAF
    assert to_sympy(p) == sympy.expand(sympy.Symbol("x0") ** 4 - 6 * sympy.Symbol("x0") ** 3 + 13 * sympy.Symbol("x0") ** 2 - 7 * sympy.Symbol("x0"))


def test_root_only_input():
    P = Pattern([PatternNode(EdgeTree())] + [PatternNode(star(m), 0, ()) for m in (2, 1)])
    out = symbolic_apply(P, LEAF)
    assert instantiate(out, {}) == pattern_apply(P, EdgeTree())


def test_free_symbolic_shapes():
    assert free_symbolic(EdgeTree()) == LEAF
    s = free_symbolic(EdgeTree([None, 0], "ab"))
    ((c, p, sub),) = s.summands
    assert c == "a" and p == Polynomial.var("x0") and len(sub.summands) == 1


def test_distinguishing_examples():
    s1, s2 = stree([("a", x, LEAF)]), stree([("a", x * x, LEAF)])
    a = distinguishing_params(s1, s2, 1)
    assert instantiate(s1, a) != instantiate(s2, a)
    with pytest.raises(SymbolicError):
        distinguishing_params(s1, s1, 1)


@given(polys, polys)
def test_arithmetic_matches_sympy(p, q):
    assert to_sympy(p + q) == sympy.expand(to_sympy(p) + to_sympy(q))
    assert to_sympy(p - q) == sympy.expand(to_sympy(p) - to_sympy(q))
    assert to_sympy(p * q) == sympy.expand(to_sympy(p) * to_sympy(q))


@given(polys)
def test_poly_text_roundtrip(p):
    assert poly_from_sexp(_parse(poly_to_sexp(p))) == p


def _parse(text):
    from polyreg.sexp import parse

    return parse(text)


@given(st.randoms(use_true_random=False))
def test_stree_text_roundtrip(rng):
    P = random_pattern(rng, 2, "ab", 2, 2, 2)
    s = symbolic_apply(P, free_symbolic(random_tree(rng, 2, "ab", 2, 3)))
    assert stree_from_sexp(stree_to_sexp(s)) == s


@given(st.randoms(use_true_random=False))
def test_distinguishing_on_random_pairs(rng):
    t = free_symbolic(random_tree(rng, 2, "ab", 2, 3))
    s1 = symbolic_apply(random_pattern(rng, 2, "ab", 2, 2, 2), t)
    s2 = symbolic_apply(random_pattern(rng, 2, "ab", 2, 2, 2), t)
    if s1 == s2:
        return
    a = distinguishing_params(s1, s2, 4)
    assert instantiate(s1, a) != instantiate(s2, a)


IDENT = """(interpretation (input-tree a b) (output-type (M 1))
  (component r :dim 0 :universe true)
  (component e :dim 1 :vars (x) :universe true)
  (relation sim:ε (e e) :vars (x y) (= x y)))"""


def test_qf_equiv_examples():
    f = parse_interp(IDENT)
    g = parse_interp(IDENT.replace("(= x y)", "(and (= x y) (= y x))"))
    assert isinstance(qf_equiv(f, g, 1, 1, "ab"), Equivalent)
    const = parse_interp("(interpretation (input-tree a b) (output-type (M 1)) (component r :dim 0 :universe true))")
    v = qf_equiv(f, const, 1, 1, "ab")
    assert isinstance(v, Counterexample) and len(v.tree) >= 1 and v.left != v.right
