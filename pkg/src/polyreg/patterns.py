"""Patterns: trees of edge-tree labels that define tree-to-tree functions by
counting embeddings, plus conversion from quantifier-free interpretations and
pattern isomorphism.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

from .core import UNLABELLED, EdgeTree, bags, value_to_tree
from .logic import (
    Fn,
    Formula,
    Var,
    compile_formula,
    conj,
    edge_vocabulary,
    eq,
    neg,
    path_name,
    rel,
    struct_of_tree,
    value_of_struct,
    voc_of,
)
from .sexp import SexpError, dumps, parse, pos_of


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class PatternNode:
    label: EdgeTree
    parent: int | None = None
    embed: tuple = ()  # parent's label edge i -> edge embed[i] of this label


@dataclass
class Pattern:
    nodes: list = field(default_factory=lambda: [PatternNode(EdgeTree())])

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.nodes or self.nodes[0].parent is not None:
            raise PatternError("node 0 must be the root")
        if len(self.nodes[0].label):
            raise PatternError("the root must be labelled by the single-node tree")
        for i, nd in enumerate(self.nodes[1:], 1):
            if nd.parent is None or not 0 <= nd.parent < i:
                raise PatternError(f"node {i}: parents must precede children")
            if not is_embedding(self.nodes[nd.parent].label, nd.label, nd.embed):
                raise PatternError(f"node {i}: not an embedding of the parent label")

    def children(self, x: int) -> list:
        return [i for i, nd in enumerate(self.nodes) if nd.parent == x]

    def depth(self, x: int) -> int:
        d = 0
        while self.nodes[x].parent is not None:
            x = self.nodes[x].parent
            d += 1
        return d

    @property
    def height(self) -> int:
        return max(self.depth(x) for x in range(len(self.nodes)))

    def colors(self) -> set:
        return set().union(*(nd.label.colors() for nd in self.nodes))

    def add(self, parent: int, label: EdgeTree, embed) -> int:
        self.nodes.append(PatternNode(label, parent, tuple(embed)))
        if not is_embedding(self.nodes[parent].label, label, self.nodes[-1].embed):
            self.nodes.pop()
            raise PatternError("not an embedding of the parent label")
        return len(self.nodes) - 1


# ------------------------------------------------------------------ embeddings


def is_embedding(s: EdgeTree, t: EdgeTree, m) -> bool:
    """Injective, colour-preserving, parent-preserving, root edges to root edges."""
    if len(m) != len(s) or len(set(m)) != len(m):
        return False
    for e, img in enumerate(m):
        if not 0 <= img < len(t) or s.color[e] != t.color[img]:
            return False
        p = s.parent[e]
        if t.parent[img] != (None if p is None else m[p]):
            return False
    return True


def embeddings(s: EdgeTree, t: EdgeTree, fixed: dict | None = None):
    """Yield every embedding of s into t (as a tuple) agreeing with fixed."""
    fixed = fixed or {}
    m: list = [None] * len(s)
    used: set = set()

    def go(e):
        if e == len(s):
            yield tuple(m)
            return
        p = s.parent[e]
        if e in fixed:
            cands = [fixed[e]]
        else:
            cands = t.children[None if p is None else m[p]]
        for c in cands:
            if c in used or t.color[c] != s.color[e] or t.parent[c] != (None if p is None else m[p]):
                continue
            m[e] = c
            used.add(c)
            yield from go(e + 1)
            used.discard(c)
        m[e] = None

    yield from go(0)


def count_embeddings(s: EdgeTree, t: EdgeTree) -> int:
    return sum(1 for _ in embeddings(s, t))


# ------------------------------------------------------------------ semantics


def pattern_apply(phi: Pattern, t: EdgeTree) -> EdgeTree:
    """Output nodes are (pattern node, embedding of its label into t); children
    are the embeddings of child labels extending the parent's embedding."""
    parent: list = []
    color: list = []
    kids = {x: phi.children(x) for x in range(len(phi.nodes))}

    def go(x, alpha, out_edge):
        for y in kids[x]:
            nd = phi.nodes[y]
            fixed = {nd.embed[i]: alpha[i] for i in range(len(alpha))}
            for beta in embeddings(nd.label, t, fixed):
                e = len(parent)
                parent.append(out_edge)
                color.append(UNLABELLED)
                go(y, beta, e)

    go(0, (), None)
    return EdgeTree(parent, color)


def pattern_to_interp(phi: Pattern, colors, n: int | None = None):
    """The quantifier-free interpretation defined by a pattern: one component
    per node, with one variable per label edge. Outputs live in M^n 1."""
    from .interp import Component, Interpretation

    n = phi.height if n is None else n
    if n < phi.height:
        raise PatternError(f"pattern has height {phi.height} > {n}")
    out_voc = voc_of(bags(n))
    in_voc = edge_vocabulary(sorted(set(colors)))
    comps = []
    names = {}
    for x, nd in enumerate(phi.nodes):
        vs = tuple(f"e{x}_{i}" for i in range(len(nd.label)))
        names[x] = f"n{x}"
        comps.append(Component(names[x], vs, diagram_formula(nd.label, vs)))
    f = Interpretation(in_voc, out_voc, comps, {})
    chains = {x: _chain(phi, x) for x in range(len(phi.nodes))}
    depth = {x: len(chains[x]) - 1 for x in chains}
    for j in range(n):
        name = path_name("sim", "m" * j)
        for x, y in product(range(len(phi.nodes)), repeat=2):
            if depth[x] < j + 1 or depth[y] < j + 1:
                continue
            zx, zy = chains[x][j + 1], chains[y][j + 1]
            if zx != zy:
                continue
            mx, my = _embed_upto(phi, zx, x), _embed_upto(phi, zy, y)
            bx = tuple(f"a{i}" for i in range(len(phi.nodes[x].label)))
            by = tuple(f"b{i}" for i in range(len(phi.nodes[y].label)))
            body = conj(*(eq(bx[mx[i]], by[my[i]]) for i in range(len(mx))))
            f.set_rel(name, [names[x], names[y]], bx + by, body)
    return f


def _chain(phi: Pattern, x: int) -> list:
    out = [x]
    while phi.nodes[x].parent is not None:
        x = phi.nodes[x].parent
        out.append(x)
    return out[::-1]


def _embed_upto(phi: Pattern, z: int, x: int) -> tuple:
    """Composite embedding of the label of ancestor z into the label of x."""
    m = tuple(range(len(phi.nodes[z].label)))
    path = _chain(phi, x)
    for y in path[path.index(z) + 1 :]:
        emb = phi.nodes[y].embed
        m = tuple(emb[i] for i in m)
    return m


def diagram_formula(s: EdgeTree, vs) -> Formula:
    """Conjunction fully describing s with edge i named vs[i]."""
    parts = []
    for i, c in enumerate(s.color):
        parts.append(rel(f"col:{c}", vs[i]))
        p = s.parent[i]
        parts.append(eq(Fn("parent", Var(vs[i])), Var(vs[i] if p is None else vs[p])))
        for j in range(i):
            parts.append(neg(eq(vs[i], vs[j])))
    return conj(*parts)


# ------------------------------------------------------- from interpretations


def _marked_key(t: EdgeTree, tup: tuple):
    """Canonical code of a tree with a tuple of distinguished edges."""
    marks: dict = {}
    for i, e in enumerate(tup):
        marks.setdefault(e, []).append(i)

    def code(e):
        return tuple(sorted((t.color[c], tuple(marks.get(c, ())), code(c)) for c in t.children[e]))

    return code(None)


def _extend(t: EdgeTree, tup: tuple, k: int, colors) -> list:
    """All (tree, tuple + (b,)) where b is an old edge or the end of a new
    path hanging below an existing node, keeping height <= k."""
    out = [(t, tup + (e,)) for e in range(len(t))]
    depth = t.depth
    for anchor in [None] + list(range(len(t))):
        d0 = 0 if anchor is None else depth[anchor]
        for length in range(1, k - d0 + 1):
            for cols in product(colors, repeat=length):
                parent = list(t.parent)
                color = list(t.color)
                p = anchor
                for c in cols:
                    parent.append(p)
                    color.append(c)
                    p = len(parent) - 1
                out.append((EdgeTree(parent, color), tup + (p,)))
    return out


def _generated(t: EdgeTree, tup: tuple) -> bool:
    keep = set()
    for e in tup:
        keep.update(t.ancestors(e))
    return len(keep) == len(t)


def extensions(t: EdgeTree, tup: tuple, m: int, k: int, colors) -> list:
    """Every (tree, tuple of m more edges) generated by the full tuple and
    extending (t, tup) with t's edge ids kept, up to isomorphism over tup."""
    layer = [(t, tup)]
    for _ in range(m):
        nxt = {}
        for tt, tp in layer:
            for cand in _extend(tt, tp, k, colors):
                nxt.setdefault(_marked_key(*cand), cand)
        layer = list(nxt.values())
    return [c for c in layer if _generated(*c)]


def _tree_relations(n: int):
    """Formulas over voc(M^n 1) for 'x has depth d' and 'x is the parent of y'."""

    def inb(j, x):
        if j < 0:
            return None
        if j >= n:
            return False
        return rel(path_name("sim", "m" * j), x, x)

    def depth_is(d, x):
        parts = []
        a, b = inb(d - 1, x), inb(d, x)
        if a is False:
            return False
        if a is not None:
            parts.append(a)
        if b is not False:
            parts.append(neg(b))
        return conj(*parts)

    def parent_of(d, x, y):
        if d == 0:
            return conj()
        return rel(path_name("sim", "m" * (d - 1)), x, y)

    return depth_is, parent_of


def qf_to_pattern(f, n: int, k: int, colors=None) -> Pattern:
    """Pattern defining the same function as a quantifier-free interpretation
    from edge trees of height <= k into M^n 1 (output given by voc(M^n 1))."""
    from .interp import _translate

    if not f.quantifier_free:
        raise PatternError("interpretation is not quantifier-free")
    if colors is None:
        colors = sorted(name.partition(":")[2] for name in f.in_vocab.names() if name.startswith("col:"))
    colors = sorted(colors)
    depth_is, parent_of = _tree_relations(n)
    tests: dict = {}

    def test(key, build):
        if key not in tests:
            tests[key] = compile_formula(build())
        return tests[key]

    phi = Pattern()
    # frontier entries: (pattern node, tree, tuple, (component, block) of the last element)
    frontier = []
    root_struct = struct_of_tree(EdgeTree(), colors)
    roots = []
    for c in f.components:
        if c.dim:
            continue
        env = {"x": (c.name, ())}
        formula = conj(c.universe, _translate(depth_is(0, "x"), env, f))
        if compile_formula(formula)(root_struct, {}):
            roots.append(c)
    if len(roots) != 1:
        raise PatternError(f"expected exactly one root component of dimension 0, found {len(roots)}")
    frontier.append((0, EdgeTree(), (), roots[0]))
    for d in range(1, n + 1):
        nxt = []
        for node, t, tup, pc in frontier:
            pvars = tuple(f"p{i}" for i in range(pc.dim))
            for c in f.components:
                cvars = tuple(f"c{i}" for i in range(c.dim))

                def build(c=c, cvars=cvars, pc=pc, pvars=pvars):
                    env = {"x": (pc.name, pvars), "y": (c.name, cvars)}
                    return conj(
                        _rename_universe(c, cvars),
                        _translate(depth_is(d, "y"), env, f),
                        _translate(parent_of(d - 1, "x", "y"), env, f),
                    )

                check = test((d, pc.name, c.name), build)
                base = tup[len(tup) - pc.dim :] if pc.dim else ()
                for t2, tup2 in extensions(t, tup, c.dim, k, colors):
                    s = struct_of_tree(t2, colors)
                    env = dict(zip(pvars, base))
                    env.update(zip(cvars, tup2[len(tup) :]))
                    if check(s, env):
                        child = phi.add(node, t2, tuple(range(len(t))))
                        nxt.append((child, t2, tup2, c))
        frontier = nxt
    return phi


def _rename_universe(c, vs):
    from .logic import rename

    return rename(c.universe, dict(zip(c.vars, vs)))


def interp_tree_output(f, t: EdgeTree, n: int, colors=None) -> EdgeTree:
    """Apply an interpretation with outputs in M^n 1 to an edge tree and read
    the result back as an unlabelled tree."""
    from .interp import apply_interp

    s = apply_interp(f, struct_of_tree(t, colors))
    return value_to_tree(value_of_struct(bags(n), s))


# ---------------------------------------------------------------- isomorphism


def label_isos(s1: EdgeTree, s2: EdgeTree, fixed: dict):
    if len(s1) != len(s2):
        return
    yield from embeddings(s1, s2, fixed)


def pattern_iso(p1: Pattern, p2: Pattern):
    """A witness {node of p1: (node of p2, label isomorphism)} or None."""
    k1 = {x: p1.children(x) for x in range(len(p1.nodes))}
    k2 = {x: p2.children(x) for x in range(len(p2.nodes))}
    if len(p1.nodes) != len(p2.nodes):
        return None
    memo: dict = {}

    def iso(x1, x2, sigma):
        key = (x1, x2, sigma)
        if key in memo:
            return memo[key]
        memo[key] = None
        c1, c2 = k1[x1], k2[x2]
        if len(c1) != len(c2):
            return None
        options = {}
        for y1 in c1:
            n1 = p1.nodes[y1]
            for y2 in c2:
                n2 = p2.nodes[y2]
                fixed = {n1.embed[i]: n2.embed[sigma[i]] for i in range(len(sigma))}
                for tau in label_isos(n1.label, n2.label, fixed):
                    w = iso(y1, y2, tau)
                    if w is not None:
                        options[(y1, y2)] = w
                        break
        match = _perfect_matching(c1, c2, options)
        if match is None:
            return None
        out = {x1: (x2, sigma)}
        for y1, y2 in match.items():
            out.update(options[(y1, y2)])
        memo[key] = out
        return out

    return iso(0, 0, ())


def _perfect_matching(left, right, options) -> dict | None:
    match_r: dict = {}

    def augment(u, seen):
        for v in right:
            if (u, v) in options and v not in seen:
                seen.add(v)
                if v not in match_r or augment(match_r[v], seen):
                    match_r[v] = u
                    return True
        return False

    for u in left:
        if not augment(u, set()):
            return None
    return {u: v for v, u in match_r.items()}


def check_witness(p1: Pattern, p2: Pattern, w: dict) -> bool:
    if set(w) != set(range(len(p1.nodes))):
        return False
    if sorted(x2 for x2, _ in w.values()) != list(range(len(p2.nodes))):
        return False
    for x1, (x2, sigma) in w.items():
        n1, n2 = p1.nodes[x1], p2.nodes[x2]
        if len(n1.label) != len(n2.label) or not is_embedding(n1.label, n2.label, sigma):
            return False
        if (n1.parent is None) != (n2.parent is None):
            return False
        if n1.parent is not None:
            q2, rho = w[n1.parent]
            if n2.parent != q2:
                return False
            if any(sigma[n1.embed[i]] != n2.embed[rho[i]] for i in range(len(rho))):
                return False
    return True


# ------------------------------------------------------------------ large trees


def large_tree(labels, colors) -> EdgeTree:
    """Complete tree of height max(heights) with D children of every colour
    below each internal node, D = max total edge count over labels."""
    labels = list(labels)
    h = max((s.height for s in labels), default=0)
    d = max((len(s) for s in labels), default=0)
    parent: list = []
    color: list = []

    def grow(p, level):
        if level == h:
            return
        for c in sorted(colors):
            for _ in range(d):
                parent.append(p)
                color.append(c)
                grow(len(parent) - 1, level + 1)

    grow(None, 0)
    return EdgeTree(parent, color)


def extends_everywhere(big: EdgeTree, s: EdgeTree, sub: list, alpha: tuple) -> bool:
    """Does the embedding alpha of the parent-closed sub-forest sub of s into
    big extend to an embedding of all of s?"""
    fixed = dict(zip(sub, alpha))
    return next(embeddings(s, big, fixed), None) is not None


# ------------------------------------------------------------------ text format


def preorder(t: EdgeTree) -> tuple[EdgeTree, tuple]:
    """Renumber edges in preorder; returns the new tree and old -> new ids."""
    order: list = []

    def go(e):
        for c in t.children[e]:
            order.append(c)
            go(c)

    go(None)
    perm = [0] * len(t)
    for new, old in enumerate(order):
        perm[old] = new
    parent = [None if t.parent[o] is None else perm[t.parent[o]] for o in order]
    return EdgeTree(parent, [t.color[o] for o in order]), tuple(perm)


def show_pattern(p: Pattern) -> str:
    perms = []
    lines = ["(pattern"]
    for i, nd in enumerate(p.nodes):
        label, perm = preorder(nd.label)
        perms.append(perm)
        parts = [f"(node {i}"]
        if nd.parent is not None:
            parts.append(f":parent {nd.parent}")
        parts.append(":label " + _labelled_sexp(label))
        if nd.parent is not None:
            pp = perms[nd.parent]
            embed = [0] * len(nd.embed)
            for old, img in enumerate(nd.embed):
                embed[pp[old]] = perm[img]
            parts.append(":embed (" + " ".join(map(str, embed)) + ")")
        lines.append("  " + " ".join(parts) + ")")
    return "\n".join(lines) + ")"


def _labelled_sexp(t: EdgeTree) -> str:
    def go(e):
        return "".join(f" (edge {t.color[c]}{go(c)})" for c in t.children[e])

    return f"(tree{go(None)})"


def parse_pattern(src) -> Pattern:
    sx = parse(src) if isinstance(src, str) else src
    if not isinstance(sx, list) or not sx or sx[0] != "pattern":
        raise SexpError("expected (pattern ...)", pos_of(sx))
    nodes = []
    for block in sx[1:]:
        if not isinstance(block, list) or len(block) < 2 or block[0] != "node":
            raise SexpError(f"malformed node {dumps(block)}", pos_of(block))
        idx = int(block[1])
        if idx != len(nodes):
            raise SexpError("nodes must be numbered 0, 1, ... in order", pos_of(block))
        opts = {str(block[i]): block[i + 1] for i in range(2, len(block) - 1, 2)}
        label = _tree_by_order(opts.get(":label", ["tree"]))
        parent = int(opts[":parent"]) if ":parent" in opts else None
        embed = tuple(int(e) for e in opts.get(":embed", []))
        nodes.append(PatternNode(label, parent, embed))
    try:
        return Pattern(nodes)
    except PatternError as e:
        raise SexpError(str(e), pos_of(sx)) from None


def _tree_by_order(sx) -> EdgeTree:
    """Parse (tree (edge C ...) ...) numbering edges in preorder."""
    if not isinstance(sx, list) or not sx or sx[0] != "tree":
        raise SexpError(f"expected (tree ...), got {dumps(sx)}", pos_of(sx))
    parent: list = []
    color: list = []

    def go(items, p):
        for it in items:
            if not isinstance(it, list) or len(it) < 2 or it[0] != "edge":
                raise SexpError(f"expected (edge COLOUR ...), got {dumps(it)}", pos_of(it))
            parent.append(p)
            color.append(str(it[1]))
            go(it[2:], len(parent) - 1)

    go(sx[1:], None)
    return EdgeTree(parent, color)
