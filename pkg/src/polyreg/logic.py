"""First-order logic over relational encodings of multiset types.

Relation names are derived from the type path of the constructor that
introduces them. A path is a string over ``1``/``2`` (product sides),
``l``/``r`` (sum sides) and ``m`` (bag element); the empty path is spelled
``ε`` inside names:

    prod:<path>   unary, marks elements on the left of a product
    tag:<path>    true iff the sum at <path> took its right branch
                  (0-ary, lifted to unary once a bag encloses it)
    sim:<path>    binary, relates elements of the same bag item
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Iterable, Union

from .core import Bag, MsType, Prod, Sum, Unit, check_value, EdgeTree, UNIT
from .sexp import SexpError, dumps, parse, pos_of

EPS = "ε"


class LogicError(ValueError):
    pass


class MalformedStructure(ValueError):
    pass


# ------------------------------------------------------------------ vocabulary


@dataclass(frozen=True)
class Vocabulary:
    rels: tuple = ()  # sorted (name, arity) pairs
    funcs: tuple = ()

    @staticmethod
    def of(rels: dict, funcs: Iterable[str] = ()) -> "Vocabulary":
        return Vocabulary(tuple(sorted(rels.items())), tuple(sorted(funcs)))

    @property
    def arity(self) -> dict:
        return dict(self.rels)

    def names(self):
        return [n for n, _ in self.rels]

    def __contains__(self, name):
        return name in self.arity


def path_name(kind: str, path: str) -> str:
    return f"{kind}:{path or EPS}"


def split_name(name: str) -> tuple[str, str]:
    kind, _, path = name.partition(":")
    return kind, "" if path == EPS else path


def voc_of(ty: MsType) -> Vocabulary:
    rels: dict = {}

    def go(t, path):
        if isinstance(t, Unit):
            return
        if isinstance(t, Prod):
            rels[path_name("prod", path)] = 1
            go(t.left, path + "1")
            go(t.right, path + "2")
        elif isinstance(t, Sum):
            rels[path_name("tag", path)] = 1 if "m" in path else 0
            go(t.left, path + "l")
            go(t.right, path + "r")
        else:
            rels[path_name("sim", path)] = 2
            go(t.elem, path + "m")

    go(ty, "")
    return Vocabulary.of(rels)


def edge_vocabulary(colors: Iterable[str]) -> Vocabulary:
    return Vocabulary.of({f"col:{c}": 1 for c in colors}, ["parent"])


# ------------------------------------------------------------------ structures


@dataclass
class Structure:
    universe: tuple
    rels: dict  # name -> set of tuples
    vocab: Vocabulary
    funcs: dict = field(default_factory=dict)  # name -> dict elem -> elem

    def holds(self, name, args=()) -> bool:
        return tuple(args) in self.rels.get(name, ())

    def __repr__(self):
        return f"Structure(|U|={len(self.universe)}, rels={ {k: len(v) for k, v in self.rels.items()} })"


def struct_of_value(ty: MsType, v) -> Structure:
    """Relational encoding of a value. Elements are tuples recording the route:
    product side ``'1'``/``'2'``, bag root ``'#'`` or item index."""
    check_value(ty, v)
    voc = voc_of(ty)
    elems, rels = _encode(ty, v, "", ())
    out = {n: set() for n in voc.names()}
    for n, tups in rels.items():
        out[n] |= tups
    return Structure(tuple(elems), out, voc)


def _encode(ty, v, path, prefix):
    if isinstance(ty, Unit):
        return [prefix], {}
    if isinstance(ty, Prod):
        le, lr = _encode(ty.left, v[1], path + "1", prefix + ("1",))
        re_, rr = _encode(ty.right, v[2], path + "2", prefix + ("2",))
        rels = _merge(lr, rr)
        rels[path_name("prod", path)] = {(e,) for e in le}
        return le + re_, rels
    if isinstance(ty, Sum):
        left = v[0] == "l"
        elems, rels = _encode(ty.left if left else ty.right, v[1], path + v[0], prefix)
        rels = dict(rels)
        rels[path_name("tag", path)] = set() if left else {()}
        return elems, rels
    root = prefix + ("#",)
    elems = [root]
    rels: dict = {path_name("sim", path): set()}
    sim = rels[path_name("sim", path)]
    for i, item in enumerate(v[1]):
        ie, ir = _encode(ty.elem, item, path + "m", prefix + (i,))
        for n, tups in ir.items():
            if tups == {()}:
                tups = {(e,) for e in ie}
            rels.setdefault(n, set()).update(tups)
        sim.update((a, b) for a in ie for b in ie)
        elems.extend(ie)
    return elems, rels


def _merge(a, b):
    out = {k: set(v) for k, v in a.items()}
    for k, v in b.items():
        out.setdefault(k, set()).update(v)
    return out


def value_of_struct(ty: MsType, s: Structure):
    """Inverse of struct_of_value up to the naming of elements."""
    return _decode(ty, s, list(s.universe), "")


def _decode(ty, s, elems, path):
    if isinstance(ty, Unit):
        if len(elems) != 1:
            raise MalformedStructure(f"unit at {path or EPS} has {len(elems)} elements")
        return UNIT
    if isinstance(ty, Prod):
        rel = s.rels.get(path_name("prod", path), set())
        left = [e for e in elems if (e,) in rel]
        right = [e for e in elems if (e,) not in rel]
        return ("p", _decode(ty.left, s, left, path + "1"), _decode(ty.right, s, right, path + "2"))
    if isinstance(ty, Sum):
        name = path_name("tag", path)
        rel = s.rels.get(name, set())
        if "m" in path:
            marks = {(e,) in rel for e in elems}
            if len(marks) != 1:
                raise MalformedStructure(f"{name} is not constant on its item")
            right = marks.pop()
        else:
            right = () in rel
        step = "r" if right else "l"
        return (step, _decode(ty.right if right else ty.left, s, elems, path + step))
    sim = s.rels.get(path_name("sim", path), set())
    roots = [e for e in elems if (e, e) not in sim]
    if len(roots) != 1:
        raise MalformedStructure(f"bag at {path or EPS} has {len(roots)} root candidates")
    rest = [e for e in elems if e != roots[0]]
    classes: list[list] = []
    seen = set()
    for e in rest:
        if e in seen:
            continue
        cls = [x for x in rest if (e, x) in sim]
        if any((x, y) not in sim for x in cls for y in cls):
            raise MalformedStructure(f"sim:{path or EPS} is not an equivalence")
        seen.update(cls)
        classes.append(cls)
    return ("b", tuple(sorted(_decode(ty.elem, s, c, path + "m") for c in classes)))


def struct_of_tree(t: EdgeTree, colors: Iterable[str] | None = None) -> Structure:
    """Edge representation: universe = edges, unary colour predicates, and a
    parent function that loops on edges leaving the root."""
    cols = sorted(set(colors) if colors is not None else t.colors())
    rels = {f"col:{c}": set() for c in cols}
    for e, c in enumerate(t.color):
        if f"col:{c}" not in rels:
            raise LogicError(f"colour {c!r} outside alphabet")
        rels[f"col:{c}"].add((e,))
    par = {e: (e if p is None else p) for e, p in enumerate(t.parent)}
    return Structure(tuple(range(len(t))), rels, edge_vocabulary(cols), {"parent": par})


# -------------------------------------------------------------------- formulas


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Fn:
    fname: str
    arg: "Term"

    def __str__(self):
        return f"({self.fname} {self.arg})"


Term = Union[Var, Fn]


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Const, Rel, Eq, Not, And, Or, Exists, Forall]

TRUE_F = Const(True)
FALSE_F = Const(False)


def V(name: str) -> Var:
    return Var(name)


def rel(name: str, *vars_) -> Rel:
    return Rel(name, tuple(Var(v) if isinstance(v, str) else v for v in vars_))


def eq(a, b) -> Eq:
    return Eq(Var(a) if isinstance(a, str) else a, Var(b) if isinstance(b, str) else b)


def neg(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.body
    return Not(f)


def conj(*parts: Formula) -> Formula:
    out = []
    for p in parts:
        if isinstance(p, Const):
            if not p.value:
                return FALSE_F
            continue
        out.extend(p.parts if isinstance(p, And) else [p])
    if not out:
        return TRUE_F
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*parts: Formula) -> Formula:
    out = []
    for p in parts:
        if isinstance(p, Const):
            if p.value:
                return TRUE_F
            continue
        out.extend(p.parts if isinstance(p, Or) else [p])
    if not out:
        return FALSE_F
    return out[0] if len(out) == 1 else Or(tuple(out))


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def exists(var: str, body: Formula) -> Formula:
    return body if isinstance(body, Const) else Exists(var, body)


def forall(var: str, body: Formula) -> Formula:
    return body if isinstance(body, Const) else Forall(var, body)


def term_var(t: Term) -> str:
    while isinstance(t, Fn):
        t = t.arg
    return t.name


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, Rel):
        return frozenset(term_var(a) for a in f.args)
    if isinstance(f, Eq):
        return frozenset((term_var(f.left), term_var(f.right)))
    if isinstance(f, Not):
        return free_vars(f.body)
    if isinstance(f, (And, Or)):
        return frozenset().union(*(free_vars(p) for p in f.parts))
    return free_vars(f.body) - {f.var}


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, (Const, Rel, Eq)):
        return 0
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, (And, Or)):
        return max((quantifier_rank(p) for p in f.parts), default=0)
    return 1 + quantifier_rank(f.body)


def is_qf(f: Formula) -> bool:
    return quantifier_rank(f) == 0


def relations_used(f: Formula) -> set:
    if isinstance(f, Rel):
        return {f.name}
    if isinstance(f, (Const, Eq)):
        return set()
    if isinstance(f, (Not, Exists, Forall)):
        return relations_used(f.body)
    return set().union(*(relations_used(p) for p in f.parts))


def all_vars(f: Formula) -> set:
    if isinstance(f, (Const, Rel, Eq)):
        return set(free_vars(f))
    if isinstance(f, Not):
        return all_vars(f.body)
    if isinstance(f, (And, Or)):
        return set().union(*(all_vars(p) for p in f.parts))
    return all_vars(f.body) | {f.var}


_counter = [0]


def fresh_var(prefix: str = "_v") -> str:
    _counter[0] += 1
    return f"{prefix}{_counter[0]}"


def _subst_term(t: Term, m: dict) -> Term:
    if isinstance(t, Var):
        r = m.get(t.name)
        if r is None:
            return t
        return Var(r) if isinstance(r, str) else r
    return Fn(t.fname, _subst_term(t.arg, m))


def rename(f: Formula, m: dict) -> Formula:
    """Capture-avoiding substitution of free variables by variables or terms."""
    if not m:
        return f
    if isinstance(f, Const):
        return f
    if isinstance(f, Rel):
        return Rel(f.name, tuple(_subst_term(a, m) for a in f.args))
    if isinstance(f, Eq):
        return Eq(_subst_term(f.left, m), _subst_term(f.right, m))
    if isinstance(f, Not):
        return Not(rename(f.body, m))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename(p, m) for p in f.parts))
    inner = {k: v for k, v in m.items() if k != f.var}
    targets = {term_var(v) if not isinstance(v, str) else v for v in inner.values()}
    var = f.var
    if var in targets:
        new = fresh_var()
        inner[var] = new
        var = new
    return type(f)(var, rename(f.body, inner))


def map_atoms(f: Formula, fn: Callable[[Formula], Formula]) -> Formula:
    """Rebuild f with every atom replaced by fn(atom). Bound variables of f
    must not clash with free variables introduced by fn."""
    if isinstance(f, (Rel, Eq)):
        return fn(f)
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return neg(map_atoms(f.body, fn))
    if isinstance(f, And):
        return conj(*(map_atoms(p, fn) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(map_atoms(p, fn) for p in f.parts))
    return type(f)(f.var, map_atoms(f.body, fn))


# ---------------------------------------------------------------- s-expressions


def parse_formula(src) -> Formula:
    sx = parse(src) if isinstance(src, str) else src
    if isinstance(sx, str):
        if sx == "true":
            return TRUE_F
        if sx == "false":
            return FALSE_F
        raise SexpError(f"unexpected atom {sx!r} in formula", pos_of(sx))
    if not sx:
        raise SexpError("empty formula", pos_of(sx))
    head, args = sx[0], sx[1:]
    if head == "rel" and args and isinstance(args[0], str):
        return Rel(str(args[0]), tuple(_parse_term(a) for a in args[1:]))
    if head == "=" and len(args) == 2:
        return Eq(_parse_term(args[0]), _parse_term(args[1]))
    if head == "not" and len(args) == 1:
        return Not(parse_formula(args[0]))
    if head in ("and", "or"):
        parts = tuple(parse_formula(a) for a in args)
        if not parts:
            return TRUE_F if head == "and" else FALSE_F
        if len(parts) == 1:
            return parts[0]
        return And(parts) if head == "and" else Or(parts)
    if head in ("exists", "forall") and len(args) == 2 and isinstance(args[0], str):
        body = parse_formula(args[1])
        return Exists(str(args[0]), body) if head == "exists" else Forall(str(args[0]), body)
    raise SexpError(f"malformed formula {dumps(sx)}", pos_of(sx))


def _parse_term(sx) -> Term:
    if isinstance(sx, str):
        return Var(str(sx))
    if len(sx) == 2 and sx[0] == "parent":
        return Fn("parent", _parse_term(sx[1]))
    raise SexpError(f"malformed term {dumps(sx)}", pos_of(sx))


def show_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Rel):
        return "(rel " + " ".join([f.name] + [str(a) for a in f.args]) + ")"
    if isinstance(f, Eq):
        return f"(= {f.left} {f.right})"
    if isinstance(f, Not):
        return f"(not {show_formula(f.body)})"
    if isinstance(f, (And, Or)):
        op = "and" if isinstance(f, And) else "or"
        return f"({op} " + " ".join(show_formula(p) for p in f.parts) + ")"
    op = "exists" if isinstance(f, Exists) else "forall"
    return f"({op} {f.var} {show_formula(f.body)})"


# ----------------------------------------------------------------- evaluation

_MISSING = object()


def _compile_term(t: Term):
    if isinstance(t, Var):
        name = t.name

        def get(s, env):
            try:
                return env[name]
            except KeyError:
                raise LogicError(f"unbound variable {name}") from None

        return get
    inner = _compile_term(t.arg)
    fname = t.fname

    def app(s, env):
        try:
            return s.funcs[fname][inner(s, env)]
        except KeyError:
            raise LogicError(f"unknown function {fname}") from None

    return app


def compile_formula(f: Formula) -> Callable[[Structure, dict], bool]:
    """Closure evaluating f on (structure, assignment). The assignment dict
    is mutated temporarily during quantification and restored afterwards."""
    if isinstance(f, Const):
        val = f.value
        return lambda s, env: val
    if isinstance(f, Rel):
        name = f.name
        ts = [_compile_term(a) for a in f.args]
        if len(ts) == 0:

            def r0(s, env):
                rel_ = s.rels.get(name)
                if rel_ is None:
                    raise LogicError(f"unknown relation {name}")
                return () in rel_

            return r0
        if len(ts) == 1:
            (t0,) = ts

            def r1(s, env):
                rel_ = s.rels.get(name)
                if rel_ is None:
                    raise LogicError(f"unknown relation {name}")
                return (t0(s, env),) in rel_

            return r1

        def rn(s, env):
            rel_ = s.rels.get(name)
            if rel_ is None:
                raise LogicError(f"unknown relation {name}")
            return tuple(t(s, env) for t in ts) in rel_

        return rn
    if isinstance(f, Eq):
        a, b = _compile_term(f.left), _compile_term(f.right)
        return lambda s, env: a(s, env) == b(s, env)
    if isinstance(f, Not):
        b = compile_formula(f.body)
        return lambda s, env: not b(s, env)
    if isinstance(f, And):
        ps = [compile_formula(p) for p in f.parts]
        return lambda s, env: all(p(s, env) for p in ps)
    if isinstance(f, Or):
        ps = [compile_formula(p) for p in f.parts]
        return lambda s, env: any(p(s, env) for p in ps)
    body = compile_formula(f.body)
    var = f.var
    want = isinstance(f, Exists)

    def quant(s, env):
        old = env.get(var, _MISSING)
        try:
            for a in s.universe:
                env[var] = a
                if body(s, env) == want:
                    return want
            return not want
        finally:
            if old is _MISSING:
                env.pop(var, None)
            else:
                env[var] = old

    return quant


def model_check(s: Structure, f: Formula, asg: dict | None = None) -> bool:
    env = dict(asg or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise LogicError(f"unbound variable(s): {', '.join(sorted(missing))}")
    unknown = relations_used(f) - set(s.rels)
    if unknown:
        raise LogicError(f"unknown relation(s): {', '.join(sorted(unknown))}")
    return compile_formula(f)(s, env)


def root_formula(ty: MsType, x: str, path: str = "") -> Formula:
    """Defines the unique root element of a structure over ty."""
    if isinstance(ty, Unit):
        return TRUE_F
    if isinstance(ty, Prod):
        return conj(rel(path_name("prod", path), x), root_formula(ty.left, x, path + "1"))
    if isinstance(ty, Sum):
        name = path_name("tag", path)
        t = rel(name, x) if "m" in path else Rel(name, ())
        return disj(
            conj(neg(t), root_formula(ty.left, x, path + "l")),
            conj(t, root_formula(ty.right, x, path + "r")),
        )
    return neg(rel(path_name("sim", path), x, x))


# ------------------------------------------------------------ theory labels
#
# A label summarises a value together with n distinguished coordinates.
#   unit     ('1', n)
#   sum      ('l' | 'r', inner)
#   product  ('p', sides, left, right)   sides[i] in {1, 2}
#   bag      ('m', n, alpha, roots, items)
#            alpha: sorted ((base label, count cut at threshold), ...)
#            roots: coordinates sitting on the bag root
#            items: sorted ((coordinates, pointed item label), ...)
# Coordinates inside a sub-label are renumbered 0.. in increasing order.
# The threshold is rank + n: every quantifier step consumes at most one
# fresh item, so counts beyond that can never be told apart.


def label_arity(label) -> int:
    tag = label[0]
    if tag == "1":
        return label[1]
    if tag in "lr":
        return label_arity(label[1])
    if tag == "p":
        return len(label[1])
    return label[1]


def abstract_theory(ty: MsType, v, r: int, coords: tuple = (), threshold: int | None = None):
    """Label of (v, coords) where coords are element ids of struct_of_value(ty, v)."""
    check_value(ty, v)
    t = r + len(coords) if threshold is None else threshold
    return _label(ty, v, list(coords), t)


def _label(ty, v, coords, t):
    if isinstance(ty, Unit):
        return ("1", len(coords))
    if isinstance(ty, Sum):
        return (v[0], _label(ty.left if v[0] == "l" else ty.right, v[1], coords, t))
    if isinstance(ty, Prod):
        sides = tuple(1 if c[0] == "1" else 2 for c in coords)
        left = [c[1:] for c in coords if c[0] == "1"]
        right = [c[1:] for c in coords if c[0] == "2"]
        return ("p", sides, _label(ty.left, v[1], left, t), _label(ty.right, v[2], right, t))
    roots = tuple(i for i, c in enumerate(coords) if c[0] == "#")
    groups: dict = {}
    for i, c in enumerate(coords):
        if c[0] != "#":
            groups.setdefault(c[0], []).append(i)
    counts = Counter(_label(ty.elem, item, [], t) for item in v[1])
    alpha = tuple(sorted((b, min(n, t)) for b, n in counts.items()))
    items = tuple(
        sorted(
            (tuple(pos), _label(ty.elem, v[1][idx], [coords[p][1:] for p in pos], t))
            for idx, pos in groups.items()
        )
    )
    return ("m", len(coords), alpha, roots, items)


def forget(label):
    """The label of the same value with no coordinates."""
    tag = label[0]
    if tag == "1":
        return ("1", 0)
    if tag in "lr":
        return (tag, forget(label[1]))
    if tag == "p":
        return ("p", (), forget(label[2]), forget(label[3]))
    return ("m", 0, label[2], (), ())


def _occupied(label) -> Counter:
    return Counter(forget(L) for _, L in label[4])


def extensions(ty: MsType, label, t: int) -> list:
    """All labels obtainable by adding one more coordinate (numbered last)."""
    tag = label[0]
    if isinstance(ty, Unit):
        return [("1", label[1] + 1)]
    if isinstance(ty, Sum):
        inner = ty.left if tag == "l" else ty.right
        return [(tag, L) for L in extensions(inner, label[1], t)]
    if isinstance(ty, Prod):
        _, sides, l1, l2 = label
        out = [("p", sides + (1,), L, l2) for L in extensions(ty.left, l1, t)]
        out += [("p", sides + (2,), l1, L) for L in extensions(ty.right, l2, t)]
        return out
    _, n, alpha, roots, items = label
    out = [("m", n + 1, alpha, roots + (n,), items)]
    for j, (pos, L) in enumerate(items):
        for L2 in extensions(ty.elem, L, t):
            new = items[:j] + ((pos + (n,), L2),) + items[j + 1 :]
            out.append(("m", n + 1, alpha, roots, tuple(sorted(new))))
    occ = _occupied(label)
    for base, count in alpha:
        if count > occ[base] or count == t:
            for L2 in extensions(ty.elem, base, t):
                new = tuple(sorted(items + (((n,), L2),)))
                out.append(("m", n + 1, alpha, roots, new))
    return out


def enumerate_theories(ty: MsType, r: int, n: int, threshold: int | None = None, cap: int | None = None) -> list:
    """Every syntactically possible label with n coordinates."""
    t = r + n if threshold is None else threshold
    out = _enum(ty, n, t)
    if cap is not None and len(out) > cap:
        raise CapExceeded(f"{len(out)} theory labels exceed cap {cap}")
    return out


class CapExceeded(RuntimeError):
    pass


def _enum(ty, n, t) -> list:
    if isinstance(ty, Unit):
        return [("1", n)]
    if isinstance(ty, Sum):
        return [("l", L) for L in _enum(ty.left, n, t)] + [("r", L) for L in _enum(ty.right, n, t)]
    if isinstance(ty, Prod):
        out = []
        for sides in iproduct((1, 2), repeat=n):
            k1 = sides.count(1)
            for L1 in _enum(ty.left, k1, t):
                for L2 in _enum(ty.right, n - k1, t):
                    out.append(("p", sides, L1, L2))
        return out
    bases = _enum(ty.elem, 0, t)
    out = []
    for counts in iproduct(range(t + 1), repeat=len(bases)):
        alpha = tuple((b, c) for b, c in zip(bases, counts) if c)
        avail = dict(alpha)
        for roots, groups in _placements(n):
            choices = [_enum(ty.elem, len(g), t) for g in groups]
            for labs in iproduct(*choices):
                occ = Counter(forget(L) for L in labs)
                if all(avail.get(b, 0) >= k for b, k in occ.items()):
                    items = tuple(sorted(zip(groups, labs)))
                    out.append(("m", n, alpha, roots, items))
    return out


def _placements(n: int):
    """Ways to put coordinates 0..n-1 on the root or into unnamed item groups."""

    def parts(xs):
        if not xs:
            yield []
            return
        first, rest = xs[0], xs[1:]
        for p in parts(rest):
            yield [(first,)] + p
            for i in range(len(p)):
                yield p[:i] + [(first,) + p[i]] + p[i + 1 :]

    for mask in range(2**n):
        roots = tuple(i for i in range(n) if mask >> i & 1)
        others = [i for i in range(n) if not mask >> i & 1]
        for p in parts(others):
            yield roots, tuple(sorted(tuple(sorted(g)) for g in p))


def _local(positions, sub):
    return [positions.index(c) for c in sub]


def _label_eq(ty, label, i, j) -> bool:
    if isinstance(ty, Unit):
        return True
    if isinstance(ty, Sum):
        return _label_eq(ty.left if label[0] == "l" else ty.right, label[1], i, j)
    if isinstance(ty, Prod):
        sides = label[1]
        if sides[i] != sides[j]:
            return False
        s = sides[i]
        pos = [k for k, x in enumerate(sides) if x == s]
        return _label_eq(ty.left if s == 1 else ty.right, label[1 + s], pos.index(i), pos.index(j))
    roots = label[3]
    if i in roots or j in roots:
        return i in roots and j in roots
    for pos, L in label[4]:
        if i in pos and j in pos:
            return _label_eq(ty.elem, L, pos.index(i), pos.index(j))
    return False


def _label_rel(ty, label, kind, steps, coords, lift_at) -> bool:
    """Walk the relation's type path through the label carrying coordinates."""
    if not steps:
        if kind == "prod":
            return isinstance(ty, Prod) and label[1][coords[0]] == 1
        if kind == "tag":
            return isinstance(ty, Sum) and label[0] == "r"
        if not isinstance(ty, Bag):
            return False
        return _same_item(label, coords) is not None
    step, rest = steps[0], steps[1:]
    if step in "12":
        if not isinstance(ty, Prod):
            return False
        s = int(step)
        sides = label[1]
        if any(sides[c] != s for c in coords):
            return False
        pos = [k for k, x in enumerate(sides) if x == s]
        return _label_rel(
            ty.left if s == 1 else ty.right, label[1 + s], kind, rest, [pos.index(c) for c in coords], lift_at - 1
        )
    if step in "lr":
        if not isinstance(ty, Sum) or label[0] != step:
            return False
        return _label_rel(ty.left if step == "l" else ty.right, label[1], kind, rest, coords, lift_at - 1)
    if not isinstance(ty, Bag):
        return False
    found = _same_item(label, coords)
    if found is None:
        return False
    pos, L = found
    sub = [] if lift_at == 0 else [pos.index(c) for c in coords]
    return _label_rel(ty.elem, L, kind, rest, sub, lift_at - 1)


def _same_item(label, coords):
    if not coords:
        return None
    for pos, L in label[4]:
        if coords[0] in pos:
            return (pos, L) if all(c in pos for c in coords) else None
    return None


def label_atom(ty: MsType, label, atom: Formula, env: dict) -> bool:
    if isinstance(atom, Eq):
        return _label_eq(ty, label, env[term_var(atom.left)], env[term_var(atom.right)])
    kind, path = split_name(atom.name)
    coords = [env[term_var(a)] for a in atom.args]
    lift_at = path.rfind("m") if kind == "tag" and atom.args else -1
    if kind == "tag" and not atom.args and "m" in path:
        raise LogicError(f"{atom.name} is unary")
    return _label_rel(ty, label, kind, path, coords, lift_at)


def theory_sat(
    ty: MsType, label, f: Formula, names: list | tuple = (), r: int | None = None, threshold: int | None = None
) -> bool:
    """Evaluate f on any value realising label; names[i] is the variable bound
    to coordinate i. The label must have been built with threshold r + n
    (or the explicit threshold given)."""
    n = label_arity(label)
    if len(names) != n:
        raise LogicError(f"label has {n} coordinates, got {len(names)} names")
    missing = free_vars(f) - set(names)
    if missing:
        raise LogicError(f"unbound variable(s): {', '.join(sorted(missing))}")
    t = threshold if threshold is not None else (quantifier_rank(f) if r is None else r) + n
    if quantifier_rank(f) > t - n:
        raise LogicError(f"formula rank {quantifier_rank(f)} exceeds label rank {t - n}")
    memo: dict = {}
    return _tsat(ty, label, f, {v: i for i, v in enumerate(names)}, t, memo)


def _tsat(ty, label, f, env, t, memo):
    if isinstance(f, Const):
        return f.value
    if isinstance(f, (Rel, Eq)):
        return label_atom(ty, label, f, env)
    if isinstance(f, Not):
        return not _tsat(ty, label, f.body, env, t, memo)
    if isinstance(f, And):
        return all(_tsat(ty, label, p, env, t, memo) for p in f.parts)
    if isinstance(f, Or):
        return any(_tsat(ty, label, p, env, t, memo) for p in f.parts)
    exts = memo.get(label)
    if exts is None:
        exts = memo[label] = extensions(ty, label, t)
    n = label_arity(label)
    inner = dict(env)
    inner[f.var] = n
    want = isinstance(f, Exists)
    for L in exts:
        if _tsat(ty, L, f.body, inner, t, memo) == want:
            return want
    return not want
