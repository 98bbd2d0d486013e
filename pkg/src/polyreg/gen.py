"""Seeded random generators for types, values, formulas and trees."""

from __future__ import annotations

import random

from .core import ONE, Bag, EdgeTree, MsType, Prod, Sum, Unit, bag, inl, inr, pair, UNIT
from .logic import (
    Eq,
    Exists,
    Forall,
    Formula,
    Rel,
    Var,
    Vocabulary,
    conj,
    disj,
    neg,
    TRUE_F,
    FALSE_F,
)


def random_type(rng: random.Random, depth: int = 3, max_bags: int = 2) -> MsType:
    if depth <= 0:
        return ONE
    roll = rng.random()
    if roll < 0.25:
        return ONE
    if roll < 0.5 and max_bags > 0:
        return Bag(random_type(rng, depth - 1, max_bags - 1))
    if roll < 0.75:
        return Sum(random_type(rng, depth - 1, max_bags), random_type(rng, depth - 1, max_bags))
    return Prod(random_type(rng, depth - 1, max_bags), random_type(rng, depth - 1, max_bags))


def random_value(rng: random.Random, ty: MsType, max_bag: int = 3, budget: list | None = None):
    """Random inhabitant; budget[0] bounds the total number of bag items."""
    if budget is None:
        budget = [10**9]
    if isinstance(ty, Unit):
        return UNIT
    if isinstance(ty, Sum):
        if rng.random() < 0.5:
            return inl(random_value(rng, ty.left, max_bag, budget))
        return inr(random_value(rng, ty.right, max_bag, budget))
    if isinstance(ty, Prod):
        return pair(random_value(rng, ty.left, max_bag, budget), random_value(rng, ty.right, max_bag, budget))
    n = rng.randint(0, min(max_bag, max(budget[0], 0)))
    budget[0] -= n
    return bag(random_value(rng, ty.elem, max_bag, budget) for _ in range(n))


def random_formula(
    rng: random.Random,
    vocab: Vocabulary,
    rank: int,
    free: list | tuple = (),
    depth: int = 3,
    parent_fn: bool = False,
) -> Formula:
    """Random formula with quantifier rank <= rank whose free variables are
    among ``free``."""
    counter = [len(free)]
    rels = list(vocab.rels)

    def atom(scope):
        options = []
        for name, ar in rels:
            if ar == 0 or scope:
                options.append((name, ar))
        if scope:
            options.append(("=", 2))
        if not options:
            return TRUE_F if rng.random() < 0.5 else FALSE_F
        name, ar = rng.choice(options)

        def term():
            t = Var(rng.choice(scope))
            if parent_fn and rng.random() < 0.3:
                from .logic import Fn

                t = Fn("parent", t)
            return t

        if name == "=":
            return Eq(term(), term())
        return Rel(name, tuple(term() for _ in range(ar)))

    def go(scope, r, d):
        roll = rng.random()
        if r > 0 and (roll < 0.45 or not scope and roll < 0.8):
            counter[0] += 1
            v = f"z{counter[0]}"
            body = go(scope + [v], r - 1, d)
            return Exists(v, body) if rng.random() < 0.5 else Forall(v, body)
        if d <= 0 or roll < 0.6:
            return atom(scope)
        if roll < 0.7:
            return neg(go(scope, r, d - 1))
        a, b = go(scope, r, d - 1), go(scope, r, d - 1)
        return conj(a, b) if roll < 0.85 else disj(a, b)

    return go(list(free), rank, depth)


def random_tree(rng: random.Random, height: int, colors, max_children: int = 3, max_edges: int | None = None) -> EdgeTree:
    parent: list = []
    color: list = []
    cols = list(colors)

    def grow(p, h):
        if h == 0:
            return
        for _ in range(rng.randint(0, max_children)):
            if max_edges is not None and len(parent) >= max_edges:
                return
            e = len(parent)
            parent.append(p)
            color.append(rng.choice(cols))
            grow(e, h - 1)

    grow(None, height)
    return EdgeTree(parent, color)


def all_trees(height: int, colors, max_edges: int) -> list[EdgeTree]:
    """Every tree (up to isomorphism) of height <= height with <= max_edges edges."""
    cols = sorted(colors)

    def forests(h, budget):
        # multisets of (colour, subtree-code) with total edge count <= budget
        if h == 0 or budget == 0:
            return {(): 0}
        subs = []
        for c in cols:
            for code, size in forests(h - 1, budget - 1).items():
                subs.append(((c, code), size + 1))
        subs.sort()
        out = {}

        def pick(start, acc, used):
            out[tuple(acc)] = used
            for i in range(start, len(subs)):
                item, size = subs[i]
                if used + size <= budget:
                    acc.append(item)
                    pick(i, acc, used + size)
                    acc.pop()

        pick(0, [], 0)
        return out

    return [EdgeTree.from_code(code) for code in sorted(forests(height, max_edges))]



def type_size(ty: MsType) -> int:
    if isinstance(ty, Unit):
        return 1
    if isinstance(ty, Bag):
        return 1 + type_size(ty.elem)
    return 1 + type_size(ty.left) + type_size(ty.right)


def random_term(rng: random.Random, dom: MsType, depth: int = 4, max_type: int = 9, max_bags: int = 3):
    """Random well-typed term with domain dom and nesting depth <= depth.
    Codomains are kept small so evaluation and compilation stay cheap."""
    from . import calculus as C
    from .core import bag_depth

    def ok(ty):
        return type_size(ty) <= max_type and bag_depth(ty) <= max_bags

    def leaf(s):
        opts = [lambda: C.ident(s), lambda: C.inl_(s, random_type(rng, 1, 1)), lambda: C.inr_(random_type(rng, 1, 1), s)]
        if s == ONE:
            opts += [lambda: C.EMPTY] * 2
        if isinstance(s, Prod):
            opts += [lambda: C.pi1(s.left, s.right), lambda: C.pi2(s.left, s.right)]
            if s.right == Bag(s.left):
                opts += [lambda: C.add(s.left)] * 3
            if isinstance(s.right, Sum):
                opts += [lambda: C.dist(s.left, s.right.left, s.right.right)] * 2
        if isinstance(s, Bag):
            e = s.elem
            opts += [lambda: C.choices(e), lambda: C.desingleton(e)] * 2
            if isinstance(e, Bag):
                opts += [lambda: C.union(e.elem)] * 3
        return rng.choice(opts)()

    def copair(s, d):
        f, g = go(s.left, d), go(s.right, d)
        cf, cg = C.codomain(f), C.codomain(g)
        if cf == cg:
            return C.Copair(f, g)
        return C.Copair(C.comp(f, C.inl_(cf, cg)), C.comp(g, C.inr_(cf, cg)))

    calls = [0]

    def go(s, d):
        # retries nest, so cap the total work; past the cap only leaves are drawn
        calls[0] += 1
        if calls[0] > 500:
            d = 0
        for _ in range(20):
            roll = rng.random()
            if d <= 0 or roll < 0.3:
                t = leaf(s)
            elif roll < 0.55:
                f = go(s, d - 1)
                t = C.comp(f, go(C.codomain(f), d - 1))
            elif roll < 0.7:
                t = C.Pair(go(s, d - 1), go(s, d - 1))
            elif roll < 0.85 and isinstance(s, Bag):
                t = C.Map(go(s.elem, d - 1))
            elif isinstance(s, Sum):
                t = copair(s, d - 1)
            else:
                t = leaf(s)
            if ok(C.codomain(t)):
                return t
        return C.ident(s)

    return go(dom, depth)


def random_pattern(rng: random.Random, k: int, colors, height: int = 2, max_children: int = 2, max_new: int = 2):
    """Random pattern over edge trees of height <= k. Child labels extend the
    parent label by a few edges; edge ids are shuffled to exercise embeddings."""
    from .patterns import Pattern, PatternNode

    cols = sorted(colors)
    nodes = [PatternNode(EdgeTree())]

    def grow_label(t: EdgeTree) -> EdgeTree:
        parent, color = list(t.parent), list(t.color)
        depth = list(t.depth)
        for _ in range(rng.randint(0, max_new)):
            anchors = [None] + [e for e in range(len(parent)) if depth[e] < k]
            a = rng.choice(anchors)
            parent.append(a)
            color.append(rng.choice(cols))
            depth.append(1 if a is None else depth[a] + 1)
        return EdgeTree(parent, color)

    def shuffle(t: EdgeTree):
        # random topological renumbering; returns new tree and old -> new
        order, remaining = [], list(range(len(t)))
        placed: set = set()
        while remaining:
            ready = [e for e in remaining if t.parent[e] is None or t.parent[e] in placed]
            e = rng.choice(ready)
            order.append(e)
            placed.add(e)
            remaining.remove(e)
        perm = [0] * len(t)
        for new, old in enumerate(order):
            perm[old] = new
        parent = [None if t.parent[o] is None else perm[t.parent[o]] for o in order]
        return EdgeTree(parent, [t.color[o] for o in order]), perm

    def grow(x, level):
        if level == height:
            return
        for _ in range(rng.randint(0, max_children)):
            base = nodes[x].label
            t, perm = shuffle(grow_label(base))
            nodes.append(PatternNode(t, x, tuple(perm[i] for i in range(len(base)))))
            grow(len(nodes) - 1, level + 1)

    grow(0, 0)
    return Pattern(nodes)


def mutate_pattern_interp(rng: random.Random, phi, colors, n: int | None = None):
    """The interpretation of a pattern with one node's universe changed in a
    way that keeps every output a tree: either a new literal is conjoined at
    a node and all its descendants, or the colour atom of an edge that is new
    at that node is dropped."""
    from .interp import Component
    from .logic import And, Fn, Var, conj, neg, eq, rel
    from .patterns import _chain, _embed_upto, pattern_to_interp

    f = pattern_to_interp(phi, colors, n)
    if len(phi.nodes) < 2:
        return f
    x = rng.randrange(1, len(phi.nodes))
    nd = phi.nodes[x]
    comps = {c.name: c for c in f.components}
    cx = comps[f"n{x}"]
    if len(nd.label) == 0:
        return f
    new_edges = [e for e in range(len(nd.label)) if e not in set(nd.embed)]
    if new_edges and rng.random() < 0.4:
        e = rng.choice(new_edges)
        drop = rel(f"col:{nd.label.color[e]}", cx.vars[e])
        parts = cx.universe.parts if isinstance(cx.universe, And) else (cx.universe,)
        comps[cx.name] = Component(cx.name, cx.vars, conj(*(p for p in parts if p != drop)))
    else:
        i = rng.randrange(len(nd.label))
        kind = rng.random()
        if kind < 0.5:
            lit = rel(f"col:{rng.choice(sorted(colors))}", f"v{i}")
        else:
            j = rng.randrange(len(nd.label))
            lit = eq(Fn("parent", Var(f"v{i}")), Var(f"v{j}"))
        if rng.random() < 0.5:
            lit = neg(lit)
        for y in range(len(phi.nodes)):
            if x not in _chain(phi, y):
                continue
            m = _embed_upto(phi, x, y)
            cy = comps[f"n{y}"]
            ren = {f"v{a}": cy.vars[m[a]] for a in range(len(m))}
            from .logic import rename

            comps[cy.name] = Component(cy.name, cy.vars, conj(cy.universe, rename(lit, ren)))
    f.components = [comps[c.name] for c in f.components]
    return f
