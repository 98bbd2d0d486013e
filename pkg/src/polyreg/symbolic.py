"""Integer polynomials, symbolic trees, and symbolic application of patterns.

A symbolic tree is a formal linear combination of (colour, subtree) pairs with
polynomial coefficients. Instantiating the variables with positive integers and
unfolding gives an ordinary tree. Applying a pattern to a symbolic tree yields
another symbolic tree that describes the outputs on all large instantiations.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from functools import cached_property

from .core import UNLABELLED, EdgeTree
from .sexp import SexpError, dumps, parse, pos_of


class SymbolicError(ValueError):
    pass


# ------------------------------------------------------------------ polynomials


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    c = Counter(dict(a))
    c.update(dict(b))
    return tuple(sorted(c.items()))


class Polynomial:
    """Sparse polynomial over the integers. Monomials are sorted tuples of
    (variable, exponent); zero coefficients are never stored."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms = {m: c for m, c in (terms or {}).items() if c}
        self._hash = None

    @staticmethod
    def const(c: int) -> "Polynomial":
        return Polynomial({(): c})

    @staticmethod
    def var(name: str) -> "Polynomial":
        return Polynomial({((name, 1),): 1})

    @staticmethod
    def coerce(x) -> "Polynomial":
        if isinstance(x, Polynomial):
            return x
        if isinstance(x, int):
            return Polynomial.const(x)
        if isinstance(x, str):
            return Polynomial.var(x)
        raise TypeError(f"cannot make a polynomial from {x!r}")

    def __add__(self, other):
        other = Polynomial.coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Polynomial.coerce(other))

    def __rsub__(self, other):
        return Polynomial.coerce(other) - self

    def __mul__(self, other):
        other = Polynomial.coerce(other)
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Polynomial(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.const(other)
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    @property
    def key(self) -> tuple:
        return tuple(sorted(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=-1)

    @property
    def variables(self) -> set:
        return {v for m in self.terms for v, _ in m}

    def evaluate(self, assign: dict) -> int:
        total = 0
        for m, c in self.terms.items():
            for v, e in m:
                if v not in assign:
                    raise SymbolicError(f"no value for variable {v}")
                c *= assign[v] ** e
            total += c
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in sorted(self.terms.items(), key=lambda mc: (-sum(e for _, e in mc[0]), mc[0])):
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)
            if not mono:
                body = str(abs(c))
            elif abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Polynomial({self})"


def falling_factorial(p, k: int) -> Polynomial:
    """p (p-1) ... (p-k+1): the number of non-repeating k-tuples from p things."""
    p = Polynomial.coerce(p)
    out = Polynomial.const(1)
    for i in range(k):
        out = out * (p - i)
    return out


def ultimately_positive(p: Polynomial) -> bool:
    """All monomials of maximal total degree have positive coefficients."""
    if p.is_zero():
        return False
    d = p.degree
    return all(c > 0 for m, c in p.terms.items() if sum(e for _, e in m) == d)


def poly_to_sexp(p: Polynomial) -> str:
    items = []
    for m, c in sorted(p.terms.items()):
        vs = " ".join(v for v, e in m for _ in range(e))
        items.append(f"(({vs}) {c})")
    return "(poly" + "".join(" " + it for it in items) + ")"


def poly_from_sexp(sx) -> Polynomial:
    if isinstance(sx, str):
        try:
            return Polynomial.const(int(sx))
        except ValueError:
            return Polynomial.var(sx)
    if not sx or sx[0] != "poly":
        raise SexpError(f"expected (poly ...), got {dumps(sx)}", pos_of(sx))
    out = Polynomial()
    for item in sx[1:]:
        if not isinstance(item, list) or len(item) != 2 or not isinstance(item[0], list):
            raise SexpError(f"expected (MONOMIAL COEFF), got {dumps(item)}", pos_of(item))
        mono = tuple(sorted(Counter(str(v) for v in item[0]).items()))
        out = out + Polynomial({mono: int(item[1])})
    return out


# ---------------------------------------------------------------- symbolic trees


@dataclass(frozen=True, eq=False)
class SymbolicTree:
    """Canonical linear combination of (colour, polynomial, subtree)."""

    summands: tuple = ()

    @cached_property
    def key(self) -> tuple:
        return tuple((c, p.key, s.key) for c, p, s in self.summands)

    def __eq__(self, other):
        return isinstance(other, SymbolicTree) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def polynomials(self) -> list:
        out = []
        for _, p, s in self.summands:
            out.append(p)
            out.extend(s.polynomials())
        return out

    @property
    def variables(self) -> set:
        return set().union(*(p.variables for p in self.polynomials()))

    @property
    def height(self) -> int:
        return max((1 + s.height for _, _, s in self.summands), default=0)

    def __str__(self):
        return stree_to_sexp(self)


LEAF = SymbolicTree(())


def stree(summands) -> SymbolicTree:
    """Canonicalise: merge summands with equal colour and subtree, drop zeros."""
    acc: dict = {}
    for color, p, sub in summands:
        p = Polynomial.coerce(p)
        k = (color, sub)
        acc[k] = acc[k] + p if k in acc else p
    items = [(c, p, s) for (c, s), p in acc.items() if not p.is_zero()]
    items.sort(key=lambda cps: (cps[0], cps[2].key, cps[1].key))
    return SymbolicTree(tuple(items))


def free_symbolic(t: EdgeTree, prefix: str = "x") -> SymbolicTree:
    """Every edge e of t becomes a summand with its own variable prefix+e."""

    def go(e):
        return stree((t.color[c], Polynomial.var(f"{prefix}{c}"), go(c)) for c in t.children[e])

    return go(None)


def explicit(s: SymbolicTree) -> tuple[EdgeTree, list]:
    """One edge per summand, in preorder; returns the tree and edge polynomials."""
    parent: list = []
    color: list = []
    polys: list = []

    def go(node, p):
        for c, poly, sub in node.summands:
            parent.append(p)
            color.append(c)
            polys.append(poly)
            go(sub, len(parent) - 1)

    go(s, None)
    return EdgeTree(parent, color), polys


def weighted(s: SymbolicTree, assign: dict):
    """Canonical weighted tree of s at the given parameters; positive weights
    required. Two instantiations are isomorphic iff these are equal."""

    def go(node):
        acc: dict = {}
        for c, p, sub in node.summands:
            w = p.evaluate(assign)
            if w <= 0:
                raise SymbolicError(f"polynomial {p} is {w} at these parameters")
            k = (c, go(sub))
            acc[k] = acc.get(k, 0) + w
        return tuple(sorted((c, w, sub) for (c, sub), w in acc.items()))

    return go(s)


def node_count(s: SymbolicTree, assign: dict) -> int:
    return 1 + sum(p.evaluate(assign) * node_count(sub, assign) for _, p, sub in s.summands)


def instantiate(s: SymbolicTree, assign: dict, with_origin: bool = False):
    """Unfold s at positive parameters. With with_origin, also return for each
    edge of the result the index of the explicit summand edge it copies."""
    parent: list = []
    color: list = []
    origin: list = []

    def go(node, p, base):
        # base: preorder index of the first summand edge of node
        idx = base
        for c, poly, sub in node.summands:
            w = poly.evaluate(assign)
            if w <= 0:
                raise SymbolicError(f"polynomial {poly} is {w} at these parameters")
            for _ in range(w):
                parent.append(p)
                color.append(c)
                origin.append(idx)
                go(sub, len(parent) - 1, idx + 1)
            idx += 1 + _size(sub)

    go(s, None, 0)
    t = EdgeTree(parent, color)
    return (t, origin) if with_origin else t


def _size(s: SymbolicTree) -> int:
    return sum(1 + _size(sub) for _, _, sub in s.summands)


# --------------------------------------------------------- symbolic application


def homomorphisms(s: EdgeTree, t: EdgeTree, fixed: dict | None = None):
    """Colour- and parent-preserving maps from edges of s to edges of t,
    root edges to root edges; not necessarily injective."""
    fixed = fixed or {}
    m: list = [None] * len(s)

    def go(e):
        if e == len(s):
            yield tuple(m)
            return
        p = s.parent[e]
        above = None if p is None else m[p]
        cands = [fixed[e]] if e in fixed else t.children[above]
        for c in cands:
            if t.color[c] != s.color[e] or t.parent[c] != above:
                continue
            m[e] = c
            yield from go(e + 1)
        m[e] = None

    yield from go(0)


def edge_polynomial(label: EdgeTree, embed: tuple, g: tuple, polys: list) -> Polynomial:
    """Number of ways to extend an embedding with the parent profile to one
    with profile g. Edges of the child label sent to the same symbolic edge
    compete for copies only when they share a parent edge in the label."""
    old = set(embed)
    groups: dict = {}
    for a in range(len(label)):
        key = (g[a], label.parent[a])
        k, l = groups.get(key, (0, 0))
        groups[key] = (k + (a in old), l + 1)
    out = Polynomial.const(1)
    for (e, _), (k, l) in sorted(groups.items(), key=lambda kv: (kv[0][0], -1 if kv[0][1] is None else kv[0][1])):
        for i in range(k, l):
            out = out * (polys[e] - i)
    return out


def paper_edge_polynomial(label: EdgeTree, embed: tuple, g: tuple, polys: list) -> Polynomial:
    """The per-edge product with k_e, l_e counted over the whole label. Agrees
    with edge_polynomial when no two label edges with different parents share
    an image."""
    old = set(embed)
    k: Counter = Counter()
    l: Counter = Counter()
    for a in range(len(label)):
        l[g[a]] += 1
        if a in old:
            k[g[a]] += 1
    out = Polynomial.const(1)
    for e in sorted(l):
        for i in range(k[e], l[e]):
            out = out * (polys[e] - i)
    return out


def profile_children(phi, x: int, h: tuple, T: EdgeTree):
    """Child profiles (y, g) of the profile (x, h)."""
    for y in phi.children(x):
        nd = phi.nodes[y]
        fixed = {nd.embed[i]: h[i] for i in range(len(h))}
        for g in homomorphisms(nd.label, T, fixed):
            yield y, g


def symbolic_apply(phi, s: SymbolicTree) -> SymbolicTree:
    """Symbolic tree r with r(a) isomorphic to phi applied to s(a) for all
    sufficiently large parameters a."""
    T, polys = explicit(s)
    memo: dict = {}

    def sym(x, h):
        key = (x, h)
        if key not in memo:
            parts = []
            for y, g in profile_children(phi, x, h, T):
                nd = phi.nodes[y]
                p = edge_polynomial(nd.label, nd.embed, g, polys)
                parts.append((UNLABELLED, p, sym(y, g)))
            memo[key] = stree(parts)
        return memo[key]

    return sym(0, ())


def threshold(phi, s: SymbolicTree) -> int:
    """Parameters above this are large enough for symbolic_apply's guarantee:
    every factor (p - i) it builds has i below the largest label size."""
    return max((len(nd.label) for nd in phi.nodes), default=0) + 1


# ---------------------------------------------------------- distinguishing inputs


def distinguishing_params(s1: SymbolicTree, s2: SymbolicTree, N: int, seed: int = 0, tries: int = 200) -> dict:
    """Parameters > N at which every polynomial of s1 and s2 is positive and
    distinct polynomials take distinct values, so the instantiations differ."""
    if s1 == s2:
        raise SymbolicError("the symbolic trees are equal; no parameters distinguish them")
    variables = sorted(s1.variables | s2.variables)
    polys = list({p.key: p for p in s1.polynomials() + s2.polynomials()}.values())
    rng = random.Random(seed)
    width = max(4, 2 * len(polys))
    for attempt in range(tries):
        assign = {v: N + 1 + rng.randrange(width) for v in variables}
        vals = [p.evaluate(assign) for p in polys]
        if min(vals, default=1) <= 0 or len(set(vals)) != len(vals):
            if attempt % 10 == 9:
                width *= 2
            continue
        if weighted(s1, assign) != weighted(s2, assign):
            return assign
    raise SymbolicError("no distinguishing parameters found within the search budget")


# ------------------------------------------------------------------ text format


def stree_to_sexp(s: SymbolicTree) -> str:
    def go(node):
        return "".join(f" (edge {c} {poly_to_sexp(p)}{go(sub)})" for c, p, sub in node.summands)

    return f"(stree{go(s)})"


def stree_from_sexp(src) -> SymbolicTree:
    sx = parse(src) if isinstance(src, str) else src
    if not isinstance(sx, list) or not sx or sx[0] != "stree":
        raise SexpError("expected (stree ...)", pos_of(sx))

    def go(items):
        parts = []
        for it in items:
            if not isinstance(it, list) or len(it) < 3 or it[0] != "edge":
                raise SexpError(f"expected (edge COLOUR POLY ...), got {dumps(it)}", pos_of(it))
            parts.append((str(it[1]), poly_from_sexp(it[2]), go(it[3:])))
        return stree(parts)

    return go(sx[1:])


# ------------------------------------------------------------------ equivalence


@dataclass
class Equivalent:
    witness: dict  # pattern isomorphism, node -> (node, label isomorphism)


@dataclass
class Counterexample:
    tree: EdgeTree
    left: EdgeTree
    right: EdgeTree


def _search_small(p1, p2, k: int, colors, max_edges: int):
    from .gen import all_trees
    from .patterns import pattern_apply

    for t in all_trees(k, colors, max_edges):
        a, b = pattern_apply(p1, t), pattern_apply(p2, t)
        if a != b:
            return Counterexample(t, a, b)
    return None


def patterns_equiv(p1, p2, k: int, colors, small_edges: int = 6, max_instance: int = 400):
    """Decide equivalence of two patterns on edge trees of height <= k."""
    from .patterns import large_tree, pattern_apply, pattern_iso

    colors = sorted(colors)
    labels = [nd.label for nd in p1.nodes] + [nd.label for nd in p2.nodes]
    big = large_tree(labels, colors)
    free = free_symbolic(big)
    out1, out2 = symbolic_apply(p1, free), symbolic_apply(p2, free)
    witness = pattern_iso(p1, p2)
    if (out1 == out2) != (witness is not None):
        raise SymbolicError("pattern isomorphism and symbolic outputs disagree")
    if witness is not None:
        return Equivalent(witness)
    found = _search_small(p1, p2, k, colors, small_edges)
    if found:
        return found
    N = max(threshold(p1, free), threshold(p2, free))
    assign = distinguishing_params(out1, out2, N)
    t = instantiate(free, assign)
    if len(t) > max_instance:
        raise SymbolicError(
            f"the distinguishing input has {len(t)} edges; too large to verify directly (limit {max_instance})"
        )
    a, b = pattern_apply(p1, t), pattern_apply(p2, t)
    if a == b:
        raise SymbolicError("distinguishing input failed direct verification")
    return Counterexample(t, a, b)


def qf_equiv(f1, f2, k: int, n: int, colors=None, **kw):
    """Decide whether two quantifier-free interpretations from edge trees of
    height <= k into M^n 1 agree up to isomorphism on every input."""
    from .patterns import interp_tree_output, qf_to_pattern

    if not (f1.quantifier_free and f2.quantifier_free):
        raise SymbolicError("both interpretations must be quantifier-free")
    if colors is None:
        names = set(f1.in_vocab.names()) | set(f2.in_vocab.names())
        colors = sorted(nm.partition(":")[2] for nm in names if nm.startswith("col:"))
    p1, p2 = qf_to_pattern(f1, n, k, colors), qf_to_pattern(f2, n, k, colors)
    verdict = patterns_equiv(p1, p2, k, colors, **kw)
    if isinstance(verdict, Counterexample):
        a = interp_tree_output(f1, verdict.tree, n, colors)
        b = interp_tree_output(f2, verdict.tree, n, colors)
        if a == b:
            raise SymbolicError("counterexample failed verification on the interpretations")
        return Counterexample(verdict.tree, a, b)
    return verdict
