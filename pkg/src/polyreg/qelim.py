"""Quantifier elimination for multiset types.

Given a type Σ and bounds (r, n), build a type Γ and a quantifier-free,
non-copying, surjective interpretation f : Γ → Σ such that every formula of
rank ≤ r with ≤ n free variables over Σ pulls back along f to a
quantifier-free formula over Γ.

Γ is a coproduct with one summand ("part") per 0-coordinate theory label of
Σ at threshold t = r + n.  For a bag type the part with profile α (how many
items carry each inner label, cut at t) is

    1 × Γ_1^α(1) × ... × 𝕄Γ_i (for each i with α(i) = t)

The leading 1 is the element that becomes the bag root.  Each copy of Γ_i
becomes one item; the optional bag factor holds every further item of a
saturated label.  A tuple of Γ-elements then determines its theory label by
a quantifier-free case split, and the pulled-back formula is the disjunction
of the cases whose label satisfies the original formula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

from .core import ONE, Bag, EdgeTree, MsType, Prod, Sum, Unit, bag, bag_depth, inl, inr, pair, prod_of, sum_of
from .interp import Component, Interpretation, fresh, fresh_block
from .logic import (
    FALSE_F,
    TRUE_F,
    CapExceeded,
    Eq,
    Fn,
    Formula,
    LogicError,
    Rel,
    conj,
    disj,
    edge_vocabulary,
    eq,
    free_vars,
    map_atoms,
    neg,
    path_name,
    quantifier_rank,
    rel,
    split_name,
    theory_sat,
    Var,
    voc_of,
)


class QelimError(ValueError):
    pass


def relocate(phi: Formula, prefix: str, anchor: str | None = None) -> Formula:
    """Rename every relation kind:q of phi to kind:prefix+q.  Nullary tags
    that land below a bag become unary and are read at anchor."""
    if not prefix:
        return phi

    def atom(a):
        if not isinstance(a, Rel):
            return a
        kind, q = split_name(a.name)
        p = prefix + q
        if kind == "tag" and not a.args and "m" in p:
            if anchor is None:
                raise QelimError(f"no anchor to lift {a.name} below {prefix}")
            return rel(path_name(kind, p), anchor)
        return Rel(path_name(kind, p), a.args)

    return map_atoms(phi, atom)


def _chain_path(j: int, k: int) -> str:
    """Path to factor j of a right-nested product of k factors."""
    if k == 1:
        return ""
    return "2" * j + ("1" if j < k - 1 else "")


def _in_factor(j: int, k: int, x: str, path: str = "") -> Formula:
    lits = [neg(rel(path_name("prod", path + "2" * i), x)) for i in range(min(j, k - 1))]
    if j < k - 1:
        lits.append(rel(path_name("prod", path + "2" * j), x))
    return conj(*lits)


def _sum_path(i: int, k: int) -> str:
    """Path to summand i of a right-nested coproduct of k summands."""
    if k == 1:
        return ""
    return "r" * i + ("l" if i < k - 1 else "")


def _sum_guard(sp: str) -> Formula:
    lits = []
    for i, step in enumerate(sp):
        t = Rel(path_name("tag", sp[:i]), ())
        lits.append(t if step == "r" else neg(t))
    return conj(*lits)


@dataclass
class Part:
    """One summand of Γ: every Σ-value it produces has the same label.

    universe(x) and rels[name](*xs) are formulas over voc(gamma); the names
    of rels are Σ-relative.  cases(vars, path) splits tuples of elements of
    this summand, sitting at absolute path, by their theory label."""

    label: tuple
    gamma: MsType
    universe: Callable[[str], Formula]
    rels: dict  # name -> (arity, builder)
    cases: Callable[[tuple, str], list]
    build: Callable | None = None  # bag parts: (Σ-value, inner section) -> gamma value


def _unit_part() -> Part:
    def cases(vs, path):
        return [(TRUE_F, ("1", len(vs)))]

    return Part(("1", 0), ONE, lambda x: TRUE_F, {}, cases)


def _wrap_sum(p: Part, side: str) -> Part:
    rels = {path_name(k, side + q): (a, b) for name, (a, b) in p.rels.items() for k, q in [split_name(name)]}
    rels[path_name("tag", "")] = (0, (lambda: FALSE_F) if side == "l" else (lambda: TRUE_F))

    def cases(vs, path):
        return [(chi, (side, L)) for chi, L in p.cases(vs, path)]

    return Part((side, p.label), p.gamma, p.universe, rels, cases)


def _pair_parts(p1: Part, p2: Part) -> Part:
    gamma = Prod(p1.gamma, p2.gamma)
    p0 = path_name("prod", "")

    def universe(x):
        return disj(
            conj(rel(p0, x), relocate(p1.universe(x), "1", x)),
            conj(neg(rel(p0, x)), relocate(p2.universe(x), "2", x)),
        )

    rels = {p0: (1, lambda x: rel(p0, x))}
    for p, side, sign in ((p1, "1", True), (p2, "2", False)):
        for name, (a, b) in p.rels.items():
            kind, q = split_name(name)
            rels[path_name(kind, side + q)] = (a, _side_rel(b, side, a, sign))

    label = ("p", (), p1.label, p2.label)

    def cases(vs, path):
        if not vs:
            return [(TRUE_F, label)]
        out = []
        pp = path_name("prod", path)
        for sides in itertools.product((1, 2), repeat=len(vs)):
            xs1 = tuple(v for v, s in zip(vs, sides) if s == 1)
            xs2 = tuple(v for v, s in zip(vs, sides) if s == 2)
            chi = conj(*(rel(pp, v) if s == 1 else neg(rel(pp, v)) for v, s in zip(vs, sides)))
            for c1, l1 in p1.cases(xs1, path + "1"):
                for c2, l2 in p2.cases(xs2, path + "2"):
                    out.append((conj(chi, c1, c2), ("p", sides, l1, l2)))
        return out

    return Part(label, gamma, universe, rels, cases)


def _side_rel(b, side, a, sign):
    p0 = path_name("prod", "")
    if a == 0:
        return lambda: relocate(b(), side)

    def build(*xs):
        guard = conj(*(rel(p0, x) if sign else neg(rel(p0, x)) for x in xs))
        return conj(guard, relocate(b(*xs), side, xs[0]))

    return build


def _set_partitions(items: list):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def _bag_part(inner: list, alpha: tuple, t: int) -> Part:
    factors = [("root", None)]
    for i, a in enumerate(alpha):
        factors += [("copy", i)] * a
    factors += [("bag", i) for i, a in enumerate(alpha) if a == t]
    k = len(factors)
    fps = [_chain_path(j, k) for j in range(k)]
    gamma = prod_of([ONE] + [inner[i].gamma if kind == "copy" else Bag(inner[i].gamma) for kind, i in factors[1:]])
    alpha_t = tuple(sorted((inner[i].label, a) for i, a in enumerate(alpha) if a))
    label = ("m", 0, alpha_t, (), ())
    copies = [(j, i) for j, (kind, i) in enumerate(factors) if kind == "copy"]
    bagf = [(j, i) for j, (kind, i) in enumerate(factors) if kind == "bag"]

    def sim(j, x, y, path=""):
        return rel(path_name("sim", path + fps[j]), x, y)

    def universe(x):
        return disj(
            _in_factor(0, k, x),
            *(conj(_in_factor(j, k, x), relocate(inner[i].universe(x), fps[j], x)) for j, i in copies),
            *(conj(sim(j, x, x), relocate(inner[i].universe(x), fps[j] + "m", x)) for j, i in bagf),
        )

    s0 = path_name("sim", "")
    rels = {
        s0: (
            2,
            lambda x, y: disj(
                *(conj(_in_factor(j, k, x), _in_factor(j, k, y)) for j, _ in copies),
                *(sim(j, x, y) for j, _ in bagf),
            ),
        )
    }
    names = {}
    for p in inner:
        for name, (a, _) in p.rels.items():
            names[name] = a
    for name, a in names.items():
        kind, q = split_name(name)
        rels[path_name(kind, "m" + q)] = (max(a, 1), _lift_rel(inner, name, a, copies, bagf, k, fps))

    def cases(vs, path):
        if not vs:
            return [(TRUE_F, label)]
        out = []
        n = len(vs)
        for where in itertools.product(range(k), repeat=n):
            groups: dict = {}
            for p in range(n):
                if factors[where[p]][0] == "bag":
                    groups.setdefault(where[p], []).append(p)
            split_choices = itertools.product(
                *[[(j, blocks) for blocks in _set_partitions(ps)] for j, ps in sorted(groups.items())]
            )
            base = conj(*(_in_factor(where[p], k, vs[p], path) for p in range(n)))
            roots = tuple(p for p in range(n) if where[p] == 0)
            copy_items = {}
            for p in range(n):
                if factors[where[p]][0] == "copy":
                    copy_items.setdefault(where[p], []).append(p)
            for choice in split_choices:
                chis = [base]
                item_specs = []  # (positions, inner part, path)
                for j, ps in copy_items.items():
                    item_specs.append((tuple(ps), inner[factors[j][1]], path + fps[j]))
                for j, blocks in choice:
                    flat = [p for b in blocks for p in b]
                    for p in flat:
                        chis.append(sim(j, vs[p], vs[p], path))
                    for b1, b2 in itertools.combinations_with_replacement(range(len(blocks)), 2):
                        for p in blocks[b1]:
                            for q in blocks[b2]:
                                if p < q:
                                    lit = sim(j, vs[p], vs[q], path)
                                    chis.append(lit if b1 == b2 else neg(lit))
                    for b in blocks:
                        item_specs.append((tuple(sorted(b)), inner[factors[j][1]], path + fps[j] + "m"))
                subs = [p.cases(tuple(vs[q] for q in ps), ip) for ps, p, ip in item_specs]
                for combo in itertools.product(*subs):
                    items = tuple(sorted((ps, L) for (ps, _, _), (_, L) in zip(item_specs, combo)))
                    chi = conj(*chis, *(c for c, _ in combo))
                    out.append((chi, ("m", n, alpha_t, roots, items)))
        return out

    def build(v, pre):
        groups: dict = {}
        for item in v[1]:
            i, g = pre(item)
            groups.setdefault(i, []).append(g)
        vals = [("u",)]
        for kind, i in factors[1:]:
            if kind == "copy":
                vals.append(groups[i].pop())
            else:
                vals.append(bag(groups.pop(i, [])))
        out = vals[-1]
        for x in reversed(vals[:-1]):
            out = pair(x, out)
        return out

    return Part(label, gamma, universe, rels, cases, build)


def _lift_rel(inner, name, a, copies, bagf, k, fps):
    def body(i, xs):
        entry = inner[i].rels.get(name)
        if entry is None:
            return FALSE_F
        return entry[1](*xs) if a else entry[1]()

    def build(*xs):
        anchor = xs[0]
        return disj(
            *(
                conj(*(_in_factor(j, k, x) for x in xs), relocate(body(i, xs), fps[j], anchor))
                for j, i in copies
            ),
            *(
                conj(
                    *(rel(path_name("sim", fps[j]), anchor, x) for x in xs),
                    relocate(body(i, xs), fps[j] + "m", anchor),
                )
                for j, i in bagf
            ),
        )

    return build


@dataclass
class _Parts:
    parts: list
    pre: Callable  # Σ-value -> (part index, gamma value)


def _parts(sigma: MsType, t: int, cap: int) -> _Parts:
    if isinstance(sigma, Unit):
        p = _unit_part()
        return _Parts([p], lambda v: (0, ("u",)))
    if isinstance(sigma, Sum):
        a, b = _parts(sigma.left, t, cap), _parts(sigma.right, t, cap)
        parts = [_wrap_sum(p, "l") for p in a.parts] + [_wrap_sum(p, "r") for p in b.parts]
        na = len(a.parts)

        def pre(v):
            if v[0] == "l":
                return a.pre(v[1])
            i, g = b.pre(v[1])
            return na + i, g

        return _Parts(parts, pre)
    if isinstance(sigma, Prod):
        a, b = _parts(sigma.left, t, cap), _parts(sigma.right, t, cap)
        if len(a.parts) * len(b.parts) > cap:
            raise CapExceeded(f"more than {cap} parts")
        parts = [_pair_parts(p1, p2) for p1 in a.parts for p2 in b.parts]
        nb = len(b.parts)

        def pre(v):
            i1, g1 = a.pre(v[1])
            i2, g2 = b.pre(v[2])
            return i1 * nb + i2, pair(g1, g2)

        return _Parts(parts, pre)
    inner = _parts(sigma.elem, t, cap)
    m = len(inner.parts)
    if (t + 1) ** m > cap:
        raise CapExceeded(f"more than {cap} parts")
    profiles = list(itertools.product(range(t + 1), repeat=m))
    index = {a: i for i, a in enumerate(profiles)}
    parts = [_bag_part(inner.parts, alpha, t) for alpha in profiles]

    def pre(v):
        counts = [0] * m
        for item in v[1]:
            counts[inner.pre(item)[0]] += 1
        i = index[tuple(min(c, t) for c in counts)]
        return i, parts[i].build(v, inner.pre)

    return _Parts(parts, pre)


@dataclass
class Qelim:
    sigma: MsType
    gamma: MsType
    interp: Interpretation
    parts: list
    paths: list  # summand path of each part inside gamma
    r: int
    n: int
    _pre: Callable

    @property
    def threshold(self) -> int:
        return self.r + self.n

    def translate(self, phi: Formula, names: tuple | None = None) -> Formula:
        """Quantifier-free ψ over Γ with A ⊨ ψ(ā) iff f(A) ⊨ φ(ā) for every
        tuple ā of elements of f(A)."""
        names = tuple(sorted(free_vars(phi))) if names is None else tuple(names)
        if len(names) > self.n:
            raise QelimError(f"{len(names)} free variables, built for {self.n}")
        if quantifier_rank(phi) > self.r:
            raise QelimError(f"rank {quantifier_rank(phi)} exceeds {self.r}")
        out = []
        t = self.threshold
        for p, sp in zip(self.parts, self.paths):
            good = []
            for chi, L in p.cases(names, sp):
                try:
                    ok = theory_sat(self.sigma, L, phi, names, threshold=t)
                except LogicError as e:
                    raise QelimError(str(e)) from e
                if ok:
                    good.append(chi)
            if good:
                out.append(conj(_sum_guard(sp), disj(*good)))
        return disj(*out)

    def section(self, v):
        """A Γ-value mapped to v by the interpretation."""
        i, g = self._pre(v)
        k = len(self.parts)
        if k > 1:
            g = inl(g) if i < k - 1 else g
            for _ in range(i):
                g = inr(g)
        return g


def qelim(sigma: MsType, r: int, n: int, cap: int = 5000) -> Qelim:
    t = r + n
    ps = _parts(sigma, t, cap)
    parts = ps.parts
    k = len(parts)
    paths = [_sum_path(i, k) for i in range(k)]
    gamma = sum_of([p.gamma for p in parts])

    def universe(x):
        return disj(*(conj(_sum_guard(sp), relocate(p.universe(x), sp, x)) for p, sp in zip(parts, paths)))

    x = fresh()
    f = Interpretation(voc_of(gamma), voc_of(sigma), [Component("c", (x,), universe(x))], {})
    for name, ar in voc_of(sigma).rels:
        block = fresh_block(ar)
        bodies = []
        for p, sp in zip(parts, paths):
            entry = p.rels.get(name)
            if entry is None:
                continue
            body = entry[1](*block) if ar else entry[1]()
            bodies.append(conj(_sum_guard(sp), relocate(body, sp, block[0] if block else None)))
        f.set_rel(name, ["c"] * ar, block, disj(*bodies))
    return Qelim(sigma, gamma, f, parts, paths, r, n, ps.pre)


# ------------------------------------------------------------ tree inputs
#
# A value of a type without sums above its bags is a fixed "shape": a list
# of positions, each a unit or a bag.  Sums resolved at the top level give
# one alternative input each; sums resolved inside a bag become edge
# colours.  An item at nesting depth d is an edge of depth d whose colour
# names the chain of (bag position, alternative) choices leading to it.


@dataclass(frozen=True)
class _Pos:
    path: str  # absolute path of the element (a unit, or a bag's root)
    elem: MsType | None  # item type of the bag, None for a unit


def _shapes(ty: MsType, path: str, cap: int) -> list:
    if isinstance(ty, Unit):
        return [(_Pos(path, None),)]
    if isinstance(ty, Bag):
        return [(_Pos(path, ty.elem),)]
    if isinstance(ty, Sum):
        return _shapes(ty.left, path + "l", cap) + _shapes(ty.right, path + "r", cap)
    a, b = _shapes(ty.left, path + "1", cap), _shapes(ty.right, path + "2", cap)
    if len(a) * len(b) > cap:
        raise CapExceeded(f"more than {cap} shapes")
    return [x + y for x in a for y in b]


def _up(x: str, j: int):
    t = Var(x)
    for _ in range(j):
        t = Fn("parent", t)
    return t


@dataclass
class TreeInput:
    """One alternative: edge trees over colors, of height <= k, onto target."""

    shape: tuple
    colors: list
    chains: dict  # chain -> (colour, positions)
    interp: Interpretation
    k: int

    def section(self, v, ty: MsType) -> EdgeTree:
        """An input tree mapped to v (v must follow this alternative's shape)."""
        parent: list = []
        color: list = []

        def place(chain, shape, vals, p):
            for b, (pos, x) in enumerate(zip(shape, vals)):
                if pos.elem is None:
                    continue
                alts = _shapes(pos.elem, pos.path + "m", 1 << 30)
                for item in x[1]:
                    j, sub = _split(pos.elem, item)
                    c = chain + ((b, j),)
                    e = len(parent)
                    parent.append(p)
                    color.append(self.chains[c][0])
                    place(c, alts[j], sub, e)

        j, vals = _split(ty, v)
        place((), self.shape, vals, None)
        return EdgeTree(parent, color)


def _split(ty: MsType, v) -> tuple:
    """(alternative index, values at the positions) of v."""
    if isinstance(ty, (Unit, Bag)):
        return 0, [v]
    if isinstance(ty, Sum):
        if v[0] == "l":
            return _split(ty.left, v[1])
        j, vals = _split(ty.right, v[1])
        return len(_shapes(ty.left, "", 1 << 30)) + j, vals
    i, a = _split(ty.left, v[1])
    j, b = _split(ty.right, v[2])
    return i * len(_shapes(ty.right, "", 1 << 30)) + j, a + b


@dataclass
class TreeReduction:
    target: MsType
    k: int
    alternatives: list  # TreeInput per top-level alternative

    @property
    def n(self) -> int:
        return len(self.alternatives)

    def section(self, v) -> tuple[int, EdgeTree]:
        j, _ = _split(self.target, v)
        return j, self.alternatives[j].section(v, self.target)


def tree_input_reduction(target: MsType, cap: int = 4096) -> TreeReduction:
    """Quantifier-free interpretations from coloured edge trees, one per
    top-level alternative of target, jointly onto every value of target."""
    k = bag_depth(target)
    alts = []
    for shape in _shapes(target, "", cap):
        alts.append(_tree_input(target, shape, k, cap))
    return TreeReduction(target, k, alts)


def _tree_input(target, shape, k, cap) -> TreeInput:
    chains: dict = {}

    def walk(chain, positions):
        for b, pos in enumerate(positions):
            if pos.elem is None:
                continue
            for j, sub in enumerate(_shapes(pos.elem, pos.path + "m", cap)):
                c = chain + ((b, j),)
                chains[c] = (f"c{len(chains)}", sub)
                if len(chains) > cap:
                    raise CapExceeded(f"more than {cap} edge colours")
                walk(c, sub)

    walk((), shape)
    colors = [col for col, _ in chains.values()]
    comps = []
    where = {}  # component name -> (depth, path)
    for i, pos in enumerate(shape):
        comps.append(Component(((), i), (), TRUE_F))
        where[((), i)] = (0, pos.path)
    for c, (col, positions) in chains.items():
        d = len(c)
        x = fresh()
        guard = [eq(_up(x, d), _up(x, d - 1))]
        for j in range(d):
            guard.append(Rel(f"col:{chains[c[: d - j]][0]}", (_up(x, j),)))
        uni = conj(*guard)
        for i, pos in enumerate(positions):
            comps.append(Component((c, i), (x,), uni))
            where[(c, i)] = (d, pos.path)
    f = Interpretation(edge_vocabulary(colors), voc_of(target), comps, {})
    for name, ar in voc_of(target).rels:
        kind, q = split_name(name)
        if ar == 0:
            if any(p.startswith(q + "r") for _, p in where.values()):
                f.set_rel(name, [], (), TRUE_F)
            continue
        if kind in ("prod", "tag"):
            step = "1" if kind == "prod" else "r"
            for cname, (d, p) in where.items():
                if p.startswith(q + step):
                    f.set_rel(name, [cname], fresh_block(min(d, 1)), TRUE_F)
            continue
        level = q.count("m") + 1  # depth of the items of this bag
        inside = [cn for cn, (d, p) in where.items() if p.startswith(q + "m")]
        for c1 in inside:
            for c2 in inside:
                (d1, _), (d2, _) = where[c1], where[c2]
                b1, b2 = fresh_block(min(d1, 1)), fresh_block(min(d2, 1))
                f.set_rel(name, [c1, c2], b1 + b2, Eq(_up(b1[0], d1 - level), _up(b2[0], d2 - level)))
    return TreeInput(shape, colors, chains, f, k)


# ------------------------------------------------------------ equivalence


@dataclass
class Equivalent:
    witnesses: list  # one pattern isomorphism per tree-input alternative


@dataclass
class ValueCounterexample:
    value: object
    left: object
    right: object


def pull_back(q: Qelim, h: Interpretation) -> Interpretation:
    """h over Σ rewritten as a quantifier-free interpretation over Γ with
    the same output on every f(A)."""
    comps = [Component(c.name, c.vars, q.translate(c.universe, c.vars)) for c in h.components]
    out = Interpretation(voc_of(q.gamma), h.out_vocab, comps, {})
    for (name, cs), (vs, phi) in h.rels.items():
        out.set_rel(name, cs, vs, q.translate(phi, vs))
    return out


def specialize(h: Interpretation, consts: dict) -> Interpretation:
    """Replace nullary relations of h's input by the given truth values."""

    def atom(a):
        if isinstance(a, Rel) and not a.args and a.name in consts:
            return TRUE_F if consts[a.name] else FALSE_F
        return a

    comps = [Component(c.name, c.vars, map_atoms(c.universe, atom)) for c in h.components]
    out = Interpretation(h.in_vocab, h.out_vocab, comps, {})
    for (name, cs), (vs, phi) in h.rels.items():
        out.set_rel(name, cs, vs, map_atoms(phi, atom))
    return out.pruned()


def _identity_qelim(sigma: MsType) -> Qelim:
    from .interp import identity_interp

    return Qelim(sigma, sigma, identity_interp(voc_of(sigma)), [], [], 0, 0, lambda v: (0, v))


def _arity(h: Interpretation) -> int:
    n = max((c.dim for c in h.components), default=0)
    return max([n] + [len(vs) for vs, _ in h.rels.values()])


def _as_interp(f):
    from .calculus import typecheck
    from .interp import compile_term

    if isinstance(f, Interpretation):
        return f, None
    typecheck(f)
    return compile_term(f), f


def _run(f, term, sigma, out_ty, v):
    from .calculus import eval_term
    from .interp import apply_interp
    from .logic import struct_of_value, value_of_struct

    if term is not None:
        return eval_term(term, v)
    return value_of_struct(out_ty, apply_interp(f, struct_of_value(sigma, v)))


def _count_values(ty: MsType, max_bag: int) -> int:
    from math import comb

    if isinstance(ty, Sum):
        return _count_values(ty.left, max_bag) + _count_values(ty.right, max_bag)
    if isinstance(ty, Prod):
        return _count_values(ty.left, max_bag) * _count_values(ty.right, max_bag)
    if isinstance(ty, Bag):
        # multisets of size <= max_bag over c letters
        return comb(_count_values(ty.elem, max_bag) + max_bag, max_bag)
    return 1


def _shrink(f1, f2, sigma, out_ty, cex, max_bag: int = 2, limit: int = 5000):
    """Swap a verified counterexample for the smallest input with bags of at
    most max_bag elements on which f1 and f2 also differ, if one is smaller."""
    from .core import canonical_value, enumerate_values, value_size

    if _count_values(sigma, max_bag) > limit:
        return cex
    small = enumerate_values(sigma, max_bag)
    bound = value_size(cex.value)
    for v in sorted(small, key=lambda x: (value_size(x), x)):
        if value_size(v) >= bound:
            break
        left = _run(*_as_interp(f1), sigma, out_ty, v)
        right = _run(*_as_interp(f2), sigma, out_ty, v)
        if canonical_value(out_ty, left) != canonical_value(out_ty, right):
            return ValueCounterexample(v, left, right)
    return cex


def equiv(f1, f2, sigma: MsType, out_ty: MsType, max_rank: int = 2, max_arity: int = 2, cap: int = 5000, **kw):
    """Decide whether f1, f2 : sigma -> out_ty (terms or interpretations)
    agree on every input.  Returns Equivalent or a verified
    ValueCounterexample."""
    from .core import bags, canonical_value
    from .derived import enc_height, encode
    from .interp import apply_interp, compile_term, compose_interp
    from .logic import struct_of_tree, struct_of_value, value_of_struct
    from .symbolic import Counterexample, qf_equiv

    g1, t1 = _as_interp(f1)
    g2, t2 = _as_interp(f2)
    height = enc_height(out_ty)
    if out_ty != bags(height):
        enc = compile_term(encode(out_ty))
        g1, g2 = compose_interp(g1, enc), compose_interp(g2, enc)
    r = max(g1.rank, g2.rank)
    n = max(_arity(g1), _arity(g2))
    if r > max_rank or n > max_arity:
        raise CapExceeded(f"rank {r} and arity {n} exceed the caps ({max_rank}, {max_arity})")
    if r == 0:
        # already quantifier-free: the surjection onto Σ is not needed
        q = _identity_qelim(sigma)
        h1, h2 = g1, g2
    else:
        q = qelim(sigma, r, n, cap=cap)
        h1, h2 = pull_back(q, g1), pull_back(q, g2)
    red = tree_input_reduction(q.gamma, cap=cap)
    witnesses = []
    for alt in red.alternatives:
        consts = {nm: (nm, ()) in alt.interp.rels for nm, ar in voc_of(q.gamma).rels if ar == 0}
        a1 = compose_interp(alt.interp, specialize(h1, consts))
        a2 = compose_interp(alt.interp, specialize(h2, consts))
        verdict = qf_equiv(a1, a2, red.k, height, alt.colors, **kw)
        if isinstance(verdict, Counterexample):
            gv = value_of_struct(q.gamma, apply_interp(alt.interp, struct_of_tree(verdict.tree, alt.colors)))
            v = value_of_struct(sigma, apply_interp(q.interp, struct_of_value(q.gamma, gv)))
            left = _run(*_as_interp(f1), sigma, out_ty, v)
            right = _run(*_as_interp(f2), sigma, out_ty, v)
            if canonical_value(out_ty, left) == canonical_value(out_ty, right):
                raise QelimError("counterexample failed direct verification")
            return _shrink(f1, f2, sigma, out_ty, ValueCounterexample(v, left, right))
        witnesses.append(verdict.witness)
    return Equivalent(witnesses)
