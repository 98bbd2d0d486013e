"""Command line interface.

Exit codes: 0 success or equivalent, 1 counterexample or divergence found,
2 usage error, malformed input or exceeded cap.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .calculus import eval_term, parse_term, show_term, typecheck
from .core import canonical_value, parse_type, parse_value, show_value, tree_from_sexp, tree_to_sexp
from .interp import apply_interp, compile_term, parse_interp, show_interp
from .logic import struct_of_tree, struct_of_value, value_of_struct
from .sexp import parse


@dataclass
class RunConfig:
    seed: int = 0
    trials: int = 100
    max_size: int = 8
    max_rank: int = 2
    max_dim: int = 2
    theory_cap: int = 5000

    def __post_init__(self):
        for name in ("trials", "max_size", "max_dim", "theory_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_rank < 0:
            raise ValueError("max_rank must be non-negative")


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _term_or_interp(path: str):
    sx = parse(_read(path))
    if isinstance(sx, list) and sx and sx[0] == "interpretation":
        return parse_interp(sx), _declared_types(sx)
    t = parse_term(sx)
    return t, typecheck(t)


def _declared_types(sx):
    types = {b[0]: parse_type(b[1]) for b in sx[1:] if isinstance(b, list) and b and b[0] in ("input-type", "output-type")}
    if len(types) != 2:
        raise UsageError("an interpretation used as a function needs input-type and output-type blocks")
    return types["input-type"], types["output-type"]


def _tree_height(voc) -> int:
    names = {n for n, _ in voc.rels}
    n = 0
    while f"sim:{'m' * n or 'ε'}" in names:
        n += 1
    return n


# ------------------------------------------------------------- commands


def cmd_eval(a, cfg):
    t = parse_term(_read(a.term))
    v = parse_value(_read(a.input))
    print(show_value(eval_term(t, v)))
    return 0


def cmd_typecheck(a, cfg):
    dom, cod = typecheck(parse_term(_read(a.term)))
    print(f"{dom} -> {cod}")
    return 0


def cmd_compile(a, cfg):
    t = parse_term(_read(a.term))
    dom, cod = typecheck(t)
    lines = show_interp(compile_term(t)).split("\n")
    # declared types make the file reusable by `apply` and `equiv`
    lines[1:3] = [f"  (input-type {dom})", f"  (output-type {cod})"]
    print("\n".join(lines))
    return 0


def cmd_apply(a, cfg):
    f = parse_interp(_read(a.interp))
    sx = parse(_read(a.input))
    if isinstance(sx, list) and sx and sx[0] == "tree":
        colors = sorted(n.partition(":")[2] for n, _ in f.in_vocab.rels if n.startswith("col:"))
        A = struct_of_tree(tree_from_sexp(sx), colors)
    else:
        if not a.input_type:
            raise UsageError("--input-type is required for value inputs")
        A = struct_of_value(parse_type(a.input_type), parse_value(sx))
    B = apply_interp(f, A)
    if a.output_type:
        print(show_value(value_of_struct(parse_type(a.output_type), B)))
    else:
        from .core import bags, value_to_tree

        h = _tree_height(f.out_vocab)
        print(tree_to_sexp(value_to_tree(value_of_struct(bags(h), B), h)))
    return 0


def _pattern_or_qf(path: str, k: int):
    from .patterns import parse_pattern, qf_to_pattern

    sx = parse(_read(path))
    if isinstance(sx, list) and sx and sx[0] == "pattern":
        return parse_pattern(sx)
    f = parse_interp(sx)
    colors = sorted(n.partition(":")[2] for n, _ in f.in_vocab.rels if n.startswith("col:"))
    return qf_to_pattern(f, _tree_height(f.out_vocab), k, colors)


def cmd_qf_equiv(a, cfg):
    from .symbolic import Counterexample, patterns_equiv

    p1, p2 = _pattern_or_qf(a.left, a.height), _pattern_or_qf(a.right, a.height)
    colors = sorted(p1.colors() | p2.colors()) or ["a"]
    verdict = patterns_equiv(p1, p2, a.height, colors)
    if isinstance(verdict, Counterexample):
        print("counterexample")
        print(tree_to_sexp(verdict.tree))
        return 1
    print("equivalent")
    return 0


def cmd_equiv(a, cfg):
    from .qelim import ValueCounterexample, equiv

    f1, (d1, c1) = _term_or_interp(a.left)
    f2, (d2, c2) = _term_or_interp(a.right)
    if (d1, c1) != (d2, c2):
        raise UsageError(f"types differ: {d1} -> {c1} versus {d2} -> {c2}")
    verdict = equiv(f1, f2, d1, c1, max_rank=cfg.max_rank, max_arity=cfg.max_dim, cap=cfg.theory_cap)
    if isinstance(verdict, ValueCounterexample):
        print(show_value(verdict.value))
        return 1
    print("equivalent")
    return 0


def cmd_symbolic_apply(a, cfg):
    from .patterns import parse_pattern
    from .symbolic import stree_from_sexp, stree_to_sexp, symbolic_apply

    p = parse_pattern(_read(a.pattern))
    s = stree_from_sexp(_read(a.stree))
    print(stree_to_sexp(symbolic_apply(p, s)))
    return 0


def cmd_td_encode(a, cfg):
    from .treedepth import parse_graph, td_encode

    g = parse_graph(_read(a.graph))
    print(show_value(td_encode(g, a.depth)))
    return 0


# ---------------------------------------------------------------- fuzzing


def _fuzz_soundness(rng, cfg):
    from .gen import random_term, random_type, random_value
    from .interp import apply_to_value

    dom = random_type(rng, 3, 2)
    t = random_term(rng, dom, 6)
    d, c = typecheck(t)
    v = random_value(rng, d, 8, [cfg.max_size])
    got, want = apply_to_value(compile_term(t), d, c, v), eval_term(t, v)
    if canonical_value(c, got) != canonical_value(c, want):
        return f"{show_term(t)} on {show_value(v)}"
    return None


def _fuzz_formulas(rng, cfg):
    from .core import boolv
    from .derived import derive_formula, point_value, rename_apart
    from .gen import random_formula, random_value
    from .logic import model_check, show_formula, voc_of

    ty = rng.choice([parse_type(s) for s in ("(M 1)", "(M (+ 1 1))", "(M (M 1))", "(* (M 1) (+ 1 1))")])
    names = [f"x{i}" for i in range(rng.randint(0, 2))]
    phi = rename_apart(random_formula(rng, voc_of(ty), min(cfg.max_rank, 2), names))
    v = random_value(rng, ty, 3, [cfg.max_size])
    A = struct_of_value(ty, v)
    coords = tuple(rng.choice(A.universe) for _ in names)
    got = eval_term(derive_formula(ty, phi, names), point_value(ty, v, coords))
    if got != boolv(model_check(A, phi, dict(zip(names, coords)))):
        return f"{show_formula(phi)} on {show_value(v)} at {coords}"
    return None


def _fuzz_patterns(rng, cfg):
    from .gen import random_pattern, random_tree
    from .patterns import interp_tree_output, pattern_apply, pattern_to_interp

    colors = ["a", "b"]
    p = random_pattern(rng, 2, colors, 2, 2, 2)
    t = random_tree(rng, 2, colors, max_edges=cfg.max_size)
    n = max(p.height, 1)
    if pattern_apply(p, t) != interp_tree_output(pattern_to_interp(p, colors, n), t, n, colors):
        return f"pattern on {tree_to_sexp(t)}"
    return None


SUITES = {"soundness": _fuzz_soundness, "formulas": _fuzz_formulas, "patterns": _fuzz_patterns}


def cmd_fuzz(a, cfg):
    trial = SUITES[a.suite]
    rng = random.Random(cfg.seed)
    start = time.time()
    bad = []
    for i in range(cfg.trials):
        msg = trial(rng, cfg)
        if msg is not None:
            bad.append(f"trial {i}: {msg}")
    for line in bad:
        print("divergence:", line)
    print(f"suite={a.suite} seed={cfg.seed} trials={cfg.trials} divergences={len(bad)}")
    # timing goes to stderr so stdout stays identical across runs
    print(f"elapsed {time.time() - start:.1f}s", file=sys.stderr)
    return 1 if bad else 0


# ------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="polyreg", description=__doc__)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-size", type=int, default=8)
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--max-dim", type=int, default=2)
    sub = p.add_subparsers(dest="cmd", required=True)

    def add(name, fn, *args):
        sp = sub.add_parser(name)
        for flag, kw in args:
            sp.add_argument(flag, **kw)
        sp.set_defaults(fn=fn)
        return sp

    req = {"required": True}
    add("eval", cmd_eval, ("--term", req), ("--input", req))
    add("typecheck", cmd_typecheck, ("--term", req))
    add("compile", cmd_compile, ("--term", req))
    add(
        "apply",
        cmd_apply,
        ("--interp", req),
        ("--input", req),
        ("--input-type", {}),
        ("--output-type", {}),
    )
    add("qf-equiv", cmd_qf_equiv, ("--left", req), ("--right", req), ("--height", {"type": int, "default": 2}))
    add("equiv", cmd_equiv, ("--left", req), ("--right", req))
    add("symbolic-apply", cmd_symbolic_apply, ("--pattern", req), ("--stree", req))
    add("td-encode", cmd_td_encode, ("--graph", req), ("--depth", {"type": int, "required": True}))
    add("fuzz", cmd_fuzz, ("--suite", {"choices": sorted(SUITES), "default": "soundness"}))
    # global flags are also accepted after the subcommand
    for sp in sub.choices.values():
        for flag, typ in (("--seed", int), ("--trials", int), ("--max-size", int), ("--max-rank", int), ("--max-dim", int)):
            sp.add_argument(flag, type=typ, default=argparse.SUPPRESS)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        cfg = RunConfig(a.seed, a.trials, a.max_size, a.max_rank, a.max_dim)
        return a.fn(a, cfg)
    except (UsageError, ValueError, TypeError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
