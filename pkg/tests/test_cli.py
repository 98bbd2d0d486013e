import pytest

from polyreg.calculus import Map, ident, show_term, union
from polyreg.cli import RunConfig, run
from polyreg.core import ONE, EdgeTree, parse_type
from polyreg.derived import const_from
from polyreg.patterns import Pattern, PatternNode, show_pattern
from polyreg.symbolic import free_symbolic, stree_to_sexp

MM1 = parse_type("(M (M 1))")
M1 = parse_type("(M 1)")


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write


def star(m):
    return EdgeTree([None] * m, ["a"] * m)


def test_eval_and_typecheck(files, capsys):
    t = files("u.term", show_term(union(ONE)))
    v = files("v.val", "(bag (bag unit) (bag unit unit))")
    assert run(["eval", "--term", t, "--input", v]) == 0
    assert capsys.readouterr().out.strip() == "(bag unit unit unit)"
    assert run(["typecheck", "--term", t]) == 0
    assert "->" in capsys.readouterr().out


def test_compile_then_apply(files, capsys):
    t = files("u.term", show_term(union(ONE)))
    assert run(["compile", "--term", t]) == 0
    f = files("u.interp", capsys.readouterr().out)
    v = files("v.val", "(bag (bag unit) (bag unit))")
    assert run(["apply", "--interp", f, "--input", v, "--input-type", "(M (M 1))", "--output-type", "(M 1)"]) == 0
    assert capsys.readouterr().out.strip() == "(bag unit unit)"


def test_equiv_exit_codes(files, capsys):
    u = files("u.term", show_term(union(ONE)))
    c = files("c.term", show_term(const_from(MM1, M1)))
    assert run(["equiv", "--left", u, "--right", c]) == 1
    assert capsys.readouterr().out.strip() == "(bag (bag unit))"
    i = files("i.term", show_term(ident(M1)))
    m = files("m.term", show_term(Map(ident(ONE))))
    assert run(["equiv", "--left", i, "--right", m]) == 0
    assert capsys.readouterr().out.strip() == "equivalent"
    assert run(["equiv", "--left", u, "--right", i]) == 2


def test_qf_equiv(files, capsys):
    P = Pattern([PatternNode(EdgeTree()), PatternNode(star(2), 0, ())])
    Q = Pattern([PatternNode(EdgeTree()), PatternNode(star(1), 0, ())])
    p, q = files("p.pat", show_pattern(P)), files("q.pat", show_pattern(Q))
    assert run(["qf-equiv", "--left", p, "--right", p, "--height", "1"]) == 0
    assert run(["qf-equiv", "--left", p, "--right", q, "--height", "1"]) == 1
    assert "counterexample" in capsys.readouterr().out


def test_symbolic_apply(files, capsys):
    P = Pattern([PatternNode(EdgeTree()), PatternNode(star(2), 0, ())])
    p = files("p.pat", show_pattern(P))
    s = files("s.stree", stree_to_sexp(free_symbolic(star(1))))
    assert run(["symbolic-apply", "--pattern", p, "--stree", s]) == 0
    assert "x0" in capsys.readouterr().out


def test_td_encode(files, capsys):
    g = files("k2.graph", "v a\nv b\ne a b\n")
    assert run(["td-encode", "--graph", g, "--depth", "2"]) == 0
    assert capsys.readouterr().out.count("pair") == 2
    assert run(["td-encode", "--graph", g, "--depth", "1"]) == 2


def test_usage_errors(files):
    assert run([]) == 2
    assert run(["eval", "--term", "/nonexistent", "--input", "/nonexistent"]) == 2
    bad = files("bad.term", "(comp (union 1")
    assert run(["typecheck", "--term", bad]) == 2
    assert run(["--trials", "0", "fuzz"]) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(trials=0)


def test_fuzz_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        assert run(["fuzz", "--suite", "patterns", "--seed", "3", "--trials", "5"]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1] and "divergences=0" in outs[0]
