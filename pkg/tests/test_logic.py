import pytest
from hypothesis import given
from hypothesis import strategies as st

from polyreg.core import canonical_value, enumerate_values, parse_type, parse_value
from polyreg.gen import random_formula, random_type, random_value
from polyreg.logic import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    LogicError,
    Not,
    Or,
    Rel,
    Var,
    abstract_theory,
    enumerate_theories,
    exists,
    is_qf,
    model_check,
    parse_formula,
    quantifier_rank,
    rel,
    show_formula,
    struct_of_value,
    theory_sat,
    value_of_struct,
    voc_of,
)

T, P = parse_type, parse_value


def naive(s, f, env):
    """Textbook recursive evaluation, used as the oracle for model_check."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Rel):
        return tuple(env[a.name] for a in f.args) in s.rels[f.name]
    if isinstance(f, Eq):
        return env[f.left.name] == env[f.right.name]
    if isinstance(f, Not):
        return not naive(s, f.body, env)
    if isinstance(f, And):
        return all(naive(s, p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(naive(s, p, env) for p in f.parts)
    test = any if isinstance(f, Exists) else all
    return test(naive(s, f.body, {**env, f.var: e}) for e in s.universe)


def test_vocabularies():
    assert voc_of(T("1")).rels == ()
    assert dict(voc_of(T("(M 1)")).rels) == {"sim:ε": 2}
    assert dict(voc_of(T("(+ 1 1)")).rels) == {"tag:ε": 0}
    assert dict(voc_of(T("(M (+ 1 1))")).rels) == {"sim:ε": 2, "tag:m": 1}


def test_structure_of_bags():
    s = struct_of_value(T("(M 1)"), P("(bag)"))
    assert len(s.universe) == 1 and not s.rels["sim:ε"]
    s = struct_of_value(T("(M 1)"), P("(bag unit unit)"))
    assert len(s.universe) == 3
    sim = s.rels["sim:ε"]
    assert len(sim) == 2 and all(a == b for a, b in sim)


def test_model_check_examples():
    phi = exists("x", rel("sim:ε", "x", "x"))
    assert not model_check(struct_of_value(T("(M 1)"), P("(bag)")), phi)
    assert model_check(struct_of_value(T("(M 1)"), P("(bag unit)")), phi)


def test_unbound_variable():
    with pytest.raises(LogicError):
        model_check(struct_of_value(T("(M 1)"), P("(bag)")), rel("sim:ε", "x", "x"))


def test_theory_threshold_cut():
    ty = T("(M 1)")
    assert abstract_theory(ty, P("(bag unit unit)"), 1) == abstract_theory(ty, P("(bag unit unit unit)"), 1)
    assert abstract_theory(ty, P("(bag unit)"), 1) != abstract_theory(ty, P("(bag)"), 1)
    assert len(enumerate_theories(ty, 2, 0)) == 3
    assert len(enumerate_theories(T("1"), 3, 0)) == 1


def test_theory_of_empty_bag():
    ty = T("(M 1)")
    L = abstract_theory(ty, P("(bag)"), 1)
    assert not theory_sat(ty, L, exists("x", rel("sim:ε", "x", "x")), [])


@given(st.randoms(use_true_random=False))
def test_struct_roundtrip(rng):
    ty = random_type(rng, 3, 2)
    v = random_value(rng, ty, 3, [10])
    assert canonical_value(ty, value_of_struct(ty, struct_of_value(ty, v))) == canonical_value(ty, v)


@given(st.randoms(use_true_random=False))
def test_model_check_matches_naive(rng):
    ty = rng.choice([T("(M 1)"), T("(M (+ 1 1))"), T("(* (M 1) (M (M 1)))")])
    s = struct_of_value(ty, random_value(rng, ty, 3, [8]))
    names = ["x0", "x1"][: rng.randint(0, 2)]
    phi = random_formula(rng, voc_of(ty), 2, names)
    env = {x: rng.choice(s.universe) for x in names}
    assert model_check(s, phi, env) == naive(s, phi, env)


@given(st.randoms(use_true_random=False))
def test_formula_text_roundtrip(rng):
    ty = random_type(rng, 3, 2)
    phi = random_formula(rng, voc_of(ty), 2, ["x"])
    assert parse_formula(show_formula(phi)) == phi
    assert quantifier_rank(phi) <= 2


@given(st.randoms(use_true_random=False))
def test_theory_determines_truth(rng):
    # values with equal labels agree on every formula of the label's rank
    ty = rng.choice([T("(M 1)"), T("(M (+ 1 1))"), T("(* (+ 1 1) (M 1))"), T("(M (M 1))")])
    r = rng.randint(0, 2)
    v = random_value(rng, ty, 4, [8])
    s = struct_of_value(ty, v)
    names = ["x0"][: rng.randint(0, 1)]
    coords = tuple(rng.choice(s.universe) for _ in names)
    phi = random_formula(rng, voc_of(ty), r, names)
    label = abstract_theory(ty, v, r, coords)
    assert theory_sat(ty, label, phi, names, r=r) == model_check(s, phi, dict(zip(names, coords)))


def test_qf_detection():
    assert is_qf(rel("sim:ε", "x", "y"))
    assert not is_qf(exists("x", rel("sim:ε", "x", "x")))
    assert quantifier_rank(Forall("x", exists("y", Eq(Var("x"), Var("y"))))) == 2


def test_enumerated_labels_are_realised():
    ty = T("(M (+ 1 1))")
    labels = set(enumerate_theories(ty, 1, 0))
    seen = {abstract_theory(ty, v, 1) for v in enumerate_values(ty, 3)}
    assert seen == labels
