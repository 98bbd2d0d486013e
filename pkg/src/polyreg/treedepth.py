"""Graphs of bounded tree-depth and their multiset encodings.

Tree-depth follows the recursive definition: an edgeless graph has depth 1,
and a graph has depth at most k > 1 if removing some single vertex leaves
components of depth at most k - 1.  On disconnected graphs this is larger
than the textbook notion (two disjoint edges have depth 3 here), and it is
exactly what the encodings below need: a graph of depth k + 1 always has a
vertex whose removal leaves components of depth k.

A finite label set of size m is the type 1 + ... + 1 (m summands), so that
a labelled vertex is a single element.  Label (a, bit) of the doubled set
is 2a + bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .core import ONE, Bag, MsType, Prod, bag, check_value, pair, sum_of
from .sexp import SexpError


class TdError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    labels: tuple  # label of vertex i, an int
    edges: frozenset = field(default_factory=frozenset)  # pairs (i, j), i < j

    def __post_init__(self):
        n = len(self.labels)
        for e in self.edges:
            if len(e) != 2 or not (0 <= e[0] < e[1] < n):
                raise TdError(f"bad edge {e}")

    @staticmethod
    def of(n: int, edges=(), labels=None) -> "Graph":
        labels = tuple(labels) if labels is not None else (0,) * n
        return Graph(labels, frozenset(tuple(sorted(e)) for e in edges))

    @property
    def n(self) -> int:
        return len(self.labels)

    def adj(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def neighbours(self, i: int) -> list:
        return [j for j in range(self.n) if j != i and self.adj(i, j)]

    def induced(self, vs) -> "Graph":
        vs = sorted(vs)
        idx = {v: i for i, v in enumerate(vs)}
        return Graph(
            tuple(self.labels[v] for v in vs),
            frozenset((idx[a], idx[b]) for a, b in self.edges if a in idx and b in idx),
        )

    def components(self, vs=None) -> list:
        """Connected components (sorted vertex lists) of the subgraph on vs."""
        left = set(range(self.n) if vs is None else vs)
        out = []
        while left:
            start = min(left)
            comp, todo = {start}, [start]
            while todo:
                a = todo.pop()
                for b in self.neighbours(a):
                    if b in left and b not in comp:
                        comp.add(b)
                        todo.append(b)
            left -= comp
            out.append(sorted(comp))
        return out

    def disjoint_union(self, other: "Graph") -> "Graph":
        k = self.n
        return Graph(self.labels + other.labels, self.edges | {(a + k, b + k) for a, b in other.edges})


# ------------------------------------------------------------- isomorphism


def _refine(g: Graph, col: list) -> list:
    while True:
        sig = [(col[v], tuple(sorted(col[u] for u in g.neighbours(v)))) for v in range(g.n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [ranks[s] for s in sig]
        if len(set(new)) == len(set(col)):
            return new
        col = new


def _twins(g: Graph, u: int, w: int) -> bool:
    return g.labels[u] == g.labels[w] and set(g.neighbours(u)) - {w} == set(g.neighbours(w)) - {u}


def canonical_form(g: Graph) -> tuple:
    """A complete isomorphism invariant by individualisation and refinement.
    Only one vertex per class of twins (same label, same other neighbours)
    is tried, since swapping twins is an automorphism."""

    def search(col):
        col = _refine(g, col)
        if len(set(col)) == g.n:
            order = sorted(range(g.n), key=lambda v: col[v])
            return (
                tuple(g.labels[v] for v in order),
                tuple(int(g.adj(order[i], order[j])) for i in range(g.n) for j in range(i + 1, g.n)),
            )
        sizes = {}
        for c in col:
            sizes[c] = sizes.get(c, 0) + 1
        cell = min(c for c, n in sizes.items() if n > 1)
        reps: list = []
        for v in range(g.n):
            if col[v] == cell and not any(_twins(g, v, r) for r in reps):
                reps.append(v)
        return min(search([2 * c + (0 if u == v else 1) for u, c in enumerate(col)]) for v in reps)

    if g.n == 0:
        return ((), ())
    labs = sorted(set(g.labels))
    return search([labs.index(lab) for lab in g.labels])


def graph_iso(a: Graph, b: Graph) -> bool:
    return a.n == b.n and sorted(a.labels) == sorted(b.labels) and canonical_form(a) == canonical_form(b)


@lru_cache(maxsize=None)
def _all_graphs(n: int, labels: int) -> tuple:
    if n == 0:
        return (Graph(()),)
    seen: dict = {}
    for h in _all_graphs(n - 1, labels):
        for lab in range(labels):
            for mask in range(1 << (n - 1)):
                g = Graph(h.labels + (lab,), h.edges | {(i, n - 1) for i in range(n - 1) if mask >> i & 1})
                seen.setdefault(canonical_form(g), g)
    return tuple(seen.values())


def all_graphs(n: int, labels: int = 1) -> list:
    """All graphs on exactly n vertices up to isomorphism (each one arises
    from a smaller representative by adding a vertex)."""
    return list(_all_graphs(n, labels))


# -------------------------------------------------------------- tree-depth


def tree_depth(g: Graph) -> int:
    if g.n == 0:
        raise TdError("the empty graph has no tree-depth")

    @lru_cache(maxsize=None)
    def td(vs: frozenset) -> int:
        if not any(a in vs and b in vs for a, b in g.edges):
            return 1
        best = None
        for v in vs:
            rest = vs - {v}
            d = 1 + max((td(frozenset(c)) for c in g.components(rest)), default=0)
            best = d if best is None else min(best, d)
        return best

    return td(frozenset(range(g.n)))


def admissible(g: Graph, k: int) -> list:
    """Vertices whose removal leaves only components of tree-depth <= k."""
    out = []
    for v in range(g.n):
        rest = [u for u in range(g.n) if u != v]
        if all(tree_depth(g.induced(c)) <= k for c in g.components(rest)):
            out.append(v)
    return out


# -------------------------------------------------------------- text format


def parse_graph(text: str) -> Graph:
    """Lines ``v ID LABEL`` and ``e ID ID``; ids are arbitrary tokens."""
    ids: dict = {}
    labels: list = []
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "v" and len(parts) in (2, 3):
            if parts[1] in ids:
                raise SexpError(f"line {lineno}: duplicate vertex {parts[1]}")
            ids[parts[1]] = len(labels)
            try:
                labels.append(int(parts[2]) if len(parts) == 3 else 0)
            except ValueError:
                raise SexpError(f"line {lineno}: label must be an integer") from None
        elif parts[0] == "e" and len(parts) == 3:
            edges.append((parts[1], parts[2]))
        else:
            raise SexpError(f"line {lineno}: expected 'v ID [LABEL]' or 'e ID ID'")
    out = set()
    for a, b in edges:
        if a not in ids or b not in ids:
            raise SexpError(f"edge {a} {b} mentions an unknown vertex")
        if a == b:
            raise SexpError(f"loop at {a}")
        out.add(tuple(sorted((ids[a], ids[b]))))
    return Graph(tuple(labels), frozenset(out))


def show_graph(g: Graph) -> str:
    lines = [f"v {i} {lab}" for i, lab in enumerate(g.labels)]
    lines += [f"e {a} {b}" for a, b in sorted(g.edges)]
    return "\n".join(lines) + "\n"


# ------------------------------------------------------- value encodings


def label_type(m: int) -> MsType:
    return sum_of([ONE] * m)


def label_value(i: int, m: int):
    v = ("u",)
    if i < m - 1:
        v = ("l", v)
    for _ in range(i):
        v = ("r", v)
    return v


def label_index(v, m: int) -> int:
    i = 0
    while i < m - 1 and v[0] == "r":
        v, i = v[1], i + 1
    return i


def surj_type(k: int, m: int = 1) -> MsType:
    """Σ × 𝕄(...) chain whose values all represent graphs of depth <= k."""
    if k < 1:
        raise TdError("tree-depth bound must be positive")
    if k == 1:
        return Bag(label_type(m))
    return Prod(label_type(m), Bag(surj_type(k - 1, 2 * m)))


def inj_type(k: int, m: int = 1) -> MsType:
    if k < 1:
        raise TdError("tree-depth bound must be positive")
    if k == 1:
        return Bag(label_type(m))
    return Bag(Prod(label_type(m), Bag(inj_type(k - 1, 2 * m))))


def _with_root(label: int, parts: list) -> Graph:
    """New vertex 0 with the given label, joined to every vertex whose
    doubled label has bit 1; labels of the parts are halved."""
    labels = [label]
    edges = set()
    for h in parts:
        base = len(labels)
        for i, lab in enumerate(h.labels):
            labels.append(lab // 2)
            if lab % 2:
                edges.add((0, base + i))
        edges |= {(a + base, b + base) for a, b in h.edges}
    return Graph(tuple(labels), frozenset(edges))


def td_decode(v, k: int, m: int = 1) -> Graph:
    """The graph represented by a value of surj_type(k, m)."""
    check_value(surj_type(k, m), v)
    return _decode_surj(v, k, m)


def _decode_surj(v, k, m):
    if k == 1:
        return Graph(tuple(label_index(x, m) for x in v[1]))
    parts = [_decode_surj(x, k - 1, 2 * m) for x in v[2][1]]
    return _with_root(label_index(v[1], m), parts)


def _doubled(g: Graph, v: int, comp: list) -> Graph:
    h = g.induced(comp)
    return Graph(tuple(2 * g.labels[u] + int(g.adj(u, v)) for u in comp), h.edges)


def td_encode(g: Graph, k: int, m: int | None = None):
    """Value of inj_type(k, m): for every vertex whose removal leaves
    components of depth < k, its label and the multiset of those components
    with one extra bit per vertex recording adjacency to it."""
    m = max(g.labels, default=0) + 1 if m is None else m
    if g.n == 0:
        raise TdError("cannot encode the empty graph")
    if any(lab >= m for lab in g.labels):
        raise TdError(f"labels must be below {m}")
    if tree_depth(g) > k:
        raise TdError(f"graph has tree-depth {tree_depth(g)} > {k}")
    return _encode(g, k, m)


def _encode(g, k, m):
    if k == 1:
        return bag(label_value(lab, m) for lab in g.labels)
    items = []
    for v in admissible(g, k - 1):
        rest = [u for u in range(g.n) if u != v]
        comps = [_encode(_doubled(g, v, c), k - 1, 2 * m) for c in g.components(rest)]
        items.append(pair(label_value(g.labels[v], m), bag(comps)))
    return bag(items)


def td_decode_step(elem, k: int, m: int = 1) -> Graph:
    """Decode one element (label, components) of td_encode(G, k): the
    deleted vertex joined back to the components by their bits."""
    if k < 2:
        raise TdError("decode steps apply from depth 2")
    parts = [_decode_inj(c, k - 1, 2 * m) for c in elem[2][1]]
    return _with_root(label_index(elem[1], m), parts)


def _decode_inj(v, k, m):
    if k == 1:
        return Graph(tuple(label_index(x, m) for x in v[1]))
    if not v[1]:
        raise TdError("empty encoding")
    return td_decode_step(v[1][0], k, m)


def td_decode_encoding(v, k: int, m: int = 1) -> Graph:
    check_value(inj_type(k, m), v)
    return _decode_inj(v, k, m)


# ------------------------------------------------------ graph structures


def graph_vocab(m: int = 1):
    from .logic import Vocabulary

    rels = {"E": 2}
    if m > 1:
        rels.update({f"lab:{i}": 1 for i in range(m)})
    return Vocabulary.of(rels)


def struct_of_graph(g: Graph, m: int = 1):
    from .logic import Structure

    rels = {"E": {(a, b) for a, b in g.edges} | {(b, a) for a, b in g.edges}}
    if m > 1:
        for i in range(m):
            rels[f"lab:{i}"] = {(v,) for v in range(g.n) if g.labels[v] == i}
    return Structure(tuple(range(g.n)), rels, graph_vocab(m))


def graph_of_struct(s, m: int = 1) -> Graph:
    idx = {e: i for i, e in enumerate(s.universe)}
    labels = []
    for e in s.universe:
        labs = [i for i in range(m) if m == 1 or s.holds(f"lab:{i}", (e,))]
        if len(labs) != 1:
            raise TdError(f"element {e} has {len(labs)} labels")
        labels.append(labs[0])
    edges = set()
    for a, b in s.rels.get("E", ()):
        if a == b:
            raise TdError("output has a loop")
        if not s.holds("E", (b, a)):
            raise TdError("output edge relation is not symmetric")
        edges.add(tuple(sorted((idx[a], idx[b]))))
    return Graph(tuple(labels), frozenset(edges))


def apply_graph_interp(f, g: Graph, m_in: int = 1, m_out: int = 1) -> Graph:
    from .interp import apply_interp

    return graph_of_struct(apply_interp(f, struct_of_graph(g, m_in), allow_empty=True), m_out)


# ------------------------------------------------- interpretation level


def _tag(path: str, x: str):
    from .logic import Rel, Var, path_name

    return Rel(path_name("tag", path), (Var(x),) if "m" in path else ())


def _label_formula(i: int, m: int, path: str, x: str):
    from .logic import conj, neg

    if m == 1:
        from .logic import TRUE_F

        return TRUE_F
    sp = "r" * i + ("l" if i < m - 1 else "")
    return conj(*(_tag(path + sp[:j], x) if sp[j] == "r" else neg(_tag(path + sp[:j], x)) for j in range(len(sp))))


def _surj_parts(k: int, m: int, path: str):
    """(vertex(x), label(i, x), edge(x, y)) for surj_type(k, m) at path."""
    from .logic import FALSE_F, conj, disj, neg, path_name, rel

    if k == 1:
        return (
            lambda x: rel(path_name("sim", path), x, x),
            lambda i, x: _label_formula(i, m, path + "m", x),
            lambda x, y: FALSE_F,
        )
    sub_v, sub_l, sub_e = _surj_parts(k - 1, 2 * m, path + "2m")

    def root(x):
        return rel(path_name("prod", path), x)

    def bit(x):
        return disj(*(sub_l(2 * a + 1, x) for a in range(m)))

    def vertex(x):
        return disj(root(x), sub_v(x))

    def label(i, x):
        return disj(
            conj(root(x), _label_formula(i, m, path + "1", x)),
            conj(neg(root(x)), disj(sub_l(2 * i, x), sub_l(2 * i + 1, x))),
        )

    def edge(x, y):
        return disj(
            conj(root(x), sub_v(y), bit(y)),
            conj(root(y), sub_v(x), bit(x)),
            conj(rel(path_name("sim", path + "2"), x, y), sub_e(x, y)),
        )

    return vertex, label, edge


def surj_interp(k: int, m: int = 1):
    """Quantifier-free interpretation from surj_type(k, m) onto graphs of
    tree-depth <= k (agrees with td_decode)."""
    from .interp import Component, Interpretation, fresh, fresh_block
    from .logic import voc_of

    vertex, label, edge = _surj_parts(k, m, "")
    x = fresh()
    f = Interpretation(voc_of(surj_type(k, m)), graph_vocab(m), [Component("v", (x,), vertex(x))], {})
    a, b = fresh_block(2)
    f.set_rel("E", ["v", "v"], (a, b), edge(a, b))
    if m > 1:
        for i in range(m):
            (y,) = fresh_block(1)
            f.set_rel(f"lab:{i}", ["v"], (y,), label(i, y))
    return f


def tree_code_type(ell: int) -> MsType:
    from .core import bags

    if ell == 1:
        return bags(1)
    if ell == 2:
        return bags(3)
    raise TdError("tree encodings of graphs are built for depth 1 and 2")


def td_tree_encode(g: Graph, ell: int):
    """Unlabelled graphs of depth <= ell as plain trees.  Depth 1: one leaf
    per vertex.  Depth 2: for every vertex v covering all edges, a node
    whose children stand for the other vertices w, each with one child
    exactly when v and w are adjacent."""
    if any(g.labels):
        raise TdError("tree encodings are for unlabelled graphs")
    if tree_depth(g) > ell:
        raise TdError(f"graph has tree-depth {tree_depth(g)} > {ell}")
    unit = ("u",)
    if ell == 1:
        return bag([unit] * g.n)
    tree_code_type(ell)
    return bag(
        bag(bag([unit] if g.adj(v, w) else []) for w in range(g.n) if w != v) for v in admissible(g, 1)
    )


def inj_tree_interp(ell: int):
    """Interpretation computing td_tree_encode on graphs of depth <= ell."""
    from .interp import Component, Interpretation, fresh, fresh_block
    from .logic import TRUE_F, conj, disj, eq, forall, neg, path_name, rel, voc_of

    out = voc_of(tree_code_type(ell))
    s0, s1, s2 = (path_name("sim", p) for p in ("", "m", "mm"))
    if ell == 1:
        x = fresh()
        f = Interpretation(graph_vocab(1), out, [Component("R", (), TRUE_F), Component("V", (x,), TRUE_F)], {})
        a, b = fresh_block(2)
        f.set_rel(s0, ["V", "V"], (a, b), eq(a, b))
        return f

    def adm(v):
        a, b = fresh_block(2)
        return forall(a, forall(b, disj(neg(rel("E", a, b)), eq(a, v), eq(b, v))))

    v1, v2, w2, v3, w3 = fresh_block(5)
    comps = [
        Component("R", (), TRUE_F),
        Component("A", (v1,), adm(v1)),
        Component("C", (v2, w2), conj(adm(v2), neg(eq(v2, w2)))),
        Component("D", (v3, w3), conj(adm(v3), neg(eq(v3, w3)), rel("E", v3, w3))),
    ]
    f = Interpretation(graph_vocab(1), out, comps, {})
    dims = {"A": 1, "C": 2, "D": 2}
    for c1 in "ACD":
        for c2 in "ACD":
            b1, b2 = fresh_block(dims[c1]), fresh_block(dims[c2])
            f.set_rel(s0, [c1, c2], b1 + b2, eq(b1[0], b2[0]))
            if c1 != "A" and c2 != "A":
                same = conj(eq(b1[0], b2[0]), eq(b1[1], b2[1]))
                f.set_rel(s1, [c1, c2], b1 + b2, same)
                if c1 == "D" and c2 == "D":
                    f.set_rel(s2, [c1, c2], b1 + b2, same)
    return f


# ---------------------------------------------------------- equivalence


@dataclass
class GraphCounterexample:
    graph: Graph
    left: Graph
    right: Graph


def td_equiv(f1, f2, k: int, ell: int, search: int = 4, max_rank: int = 2, max_arity: int = 4, **kw):
    """Decide whether two interpretations on unlabelled graphs of tree-depth
    <= k (with outputs of depth <= ell) produce isomorphic outputs on every
    input.  Small inputs are tried first; otherwise the question moves to
    the multiset types via surj_interp and inj_tree_interp."""
    from .interp import compose_interp
    from .qelim import QelimError, ValueCounterexample, equiv

    samples = [Graph(())] + [g for n in range(1, search + 1) for g in all_graphs(n) if tree_depth(g) <= k]
    for g in samples:
        a, b = apply_graph_interp(f1, g), apply_graph_interp(f2, g)
        if not graph_iso(a, b):
            return GraphCounterexample(g, a, b)
    for g in samples:
        out = apply_graph_interp(f1, g)
        if out.n and tree_depth(out) > ell:
            raise TdError(f"output of tree-depth {tree_depth(out)} > {ell} on a sampled input")
    s, inj = surj_interp(k), inj_tree_interp(ell)
    g1 = compose_interp(compose_interp(s, f1), inj)
    g2 = compose_interp(compose_interp(s, f2), inj)
    verdict = equiv(g1, g2, surj_type(k), tree_code_type(ell), max_rank=max_rank, max_arity=max_arity, **kw)
    if isinstance(verdict, ValueCounterexample):
        g = td_decode(verdict.value, k)
        a, b = apply_graph_interp(f1, g), apply_graph_interp(f2, g)
        if graph_iso(a, b):
            raise QelimError("graph counterexample failed direct verification")
        return GraphCounterexample(g, a, b)
    return verdict


def graph_interp(edge=None, dim0_apex: bool = False):
    """Dimension-one interpretation on unlabelled graphs with the edge
    relation given by edge(x, y) (default: the input edges), optionally
    with one extra vertex joined to every input vertex."""
    from .interp import Component, Interpretation, fresh, fresh_block
    from .logic import TRUE_F, rel

    x = fresh()
    comps = [Component("v", (x,), TRUE_F)]
    if dim0_apex:
        comps.append(Component("apex", (), TRUE_F))
    f = Interpretation(graph_vocab(1), graph_vocab(1), comps, {})
    a, b = fresh_block(2)
    f.set_rel("E", ["v", "v"], (a, b), edge(a, b) if edge else rel("E", a, b))
    if dim0_apex:
        (c,) = fresh_block(1)
        f.set_rel("E", ["v", "apex"], (c,), TRUE_F)
        (d,) = fresh_block(1)
        f.set_rel("E", ["apex", "v"], (d,), TRUE_F)
    return f


def edge_complement():
    from .logic import conj, eq, neg, rel

    return graph_interp(lambda a, b: conj(neg(eq(a, b)), neg(rel("E", a, b))))
