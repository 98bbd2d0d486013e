from hypothesis import given, settings
from hypothesis import strategies as st

from polyreg.calculus import Map, ident, union
from polyreg.core import ONE, canonical_value, enumerate_values, parse_type, parse_value
from polyreg.derived import const_from
from polyreg.gen import random_formula, random_value
from polyreg.interp import apply_interp
from polyreg.logic import exists, is_qf, model_check, rel, struct_of_tree, struct_of_value, value_of_struct, voc_of
from polyreg.qelim import Equivalent, ValueCounterexample, equiv, qelim, tree_input_reduction

T, P = parse_type, parse_value
M1 = T("(M 1)")
M2 = T("(M (+ 1 1))")


def image(q, g):
    return value_of_struct(q.sigma, apply_interp(q.interp, struct_of_value(q.gamma, g)))


def test_threshold():
    q = qelim(M1, 1, 2)
    assert q.threshold == 3


def test_sections_onto():
    q = qelim(M1, 1, 0)
    for v in enumerate_values(M1, 5):
        assert canonical_value(M1, image(q, q.section(v))) == canonical_value(M1, v)


def test_nonempty_sentence():
    q = qelim(M1, 1, 0)
    psi = q.translate(exists("x", rel("sim:ε", "x", "x")))
    assert is_qf(psi)
    for v in enumerate_values(M1, 4):
        g = q.section(v)
        assert model_check(struct_of_value(q.gamma, g), psi) == (len(v[1]) > 0)


def test_tree_reduction_shapes():
    red = tree_input_reduction(M1)
    assert red.n == 1 and red.k == 1
    red = tree_input_reduction(T("(+ 1 1)"))
    assert red.n == 2 and red.k == 0
    red = tree_input_reduction(M2)
    assert red.n == 1 and len(red.alternatives[0].colors) == 2


def test_tree_reduction_sections():
    for ty in (M1, M2, T("(* (M 1) (+ 1 1))"), T("(M (M 1))")):
        red = tree_input_reduction(ty)
        for v in enumerate_values(ty, 2):
            j, tree = red.section(v)
            alt = red.alternatives[j]
            got = value_of_struct(ty, apply_interp(alt.interp, struct_of_tree(tree, alt.colors)))
            assert canonical_value(ty, got) == canonical_value(ty, v)


def test_equiv_identity_forms():
    assert isinstance(equiv(ident(M1), Map(ident(ONE)), M1, M1), Equivalent)


def test_equiv_union_vs_constant():
    MM1 = T("(M (M 1))")
    v = equiv(union(ONE), const_from(MM1, M1), MM1, M1)
    assert isinstance(v, ValueCounterexample)
    assert canonical_value(MM1, v.value) == canonical_value(MM1, P("(bag (bag unit))"))
    assert v.left != v.right


@settings(max_examples=20)
@given(st.randoms(use_true_random=False))
def test_translate_one_free_variable(rng):
    ty = rng.choice([M1, M2])
    q = qelim(ty, 1, 1)
    phi = random_formula(rng, voc_of(ty), 1, ["z"])
    psi = q.translate(phi, ("z",))
    assert is_qf(psi)
    A = struct_of_value(q.gamma, random_value(rng, q.gamma, 3, [6]))
    B = apply_interp(q.interp, A)
    for a in A.universe:
        b = ("c", (a,))
        if b in B.universe:
            assert model_check(A, psi, {"z": a}) == model_check(B, phi, {"z": b})

