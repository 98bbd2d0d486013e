"""Multiset types, their nested-multiset values, and bounded-height edge trees.

Values are plain tagged tuples so that Python's tuple ordering is the
canonical total order:

    unit        ('u',)
    inl v       ('l', v)
    inr v       ('r', v)
    pair v w    ('p', v, w)
    bag         ('b', (v1, ..., vn))   with the vi sorted
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from .sexp import SexpError, dumps, parse, pos_of


class TypeMismatch(TypeError):
    pass


# --------------------------------------------------------------------- types


@dataclass(frozen=True)
class Unit:
    def __str__(self):
        return "1"


@dataclass(frozen=True)
class Sum:
    left: "MsType"
    right: "MsType"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Sum", self.left, self.right))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        return f"(+ {self.left} {self.right})"


@dataclass(frozen=True)
class Prod:
    left: "MsType"
    right: "MsType"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Prod", self.left, self.right))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        return f"(* {self.left} {self.right})"


@dataclass(frozen=True)
class Bag:
    elem: "MsType"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Bag", self.elem))
            object.__setattr__(self, "_hash", h)
        return h

    def __str__(self):
        return f"(M {self.elem})"


MsType = Union[Unit, Sum, Prod, Bag]

ONE = Unit()
BOOL = Sum(ONE, ONE)


def bags(k: int, base: MsType = ONE) -> MsType:
    """The type M^k base."""
    for _ in range(k):
        base = Bag(base)
    return base


def bag_depth(ty: MsType) -> int:
    if isinstance(ty, Unit):
        return 0
    if isinstance(ty, Bag):
        return 1 + bag_depth(ty.elem)
    return max(bag_depth(ty.left), bag_depth(ty.right))


def edge_tree_type(k: int, alphabet: MsType) -> MsType:
    """T_edge^k alphabet = M(alphabet x T_edge^(k-1) alphabet)."""
    ty: MsType = ONE
    for _ in range(k):
        ty = Bag(Prod(alphabet, ty))
    return ty


def node_tree_type(k: int, labels: MsType) -> MsType:
    ty = labels
    for _ in range(k):
        ty = Prod(labels, Bag(ty))
    return ty


def sum_of(types: list[MsType]) -> MsType:
    """Right-nested coproduct of a nonempty list."""
    if not types:
        raise ValueError("empty coproduct")
    ty = types[-1]
    for t in reversed(types[:-1]):
        ty = Sum(t, ty)
    return ty


def prod_of(types: list[MsType]) -> MsType:
    if not types:
        return ONE
    ty = types[-1]
    for t in reversed(types[:-1]):
        ty = Prod(t, ty)
    return ty


# -------------------------------------------------------------------- values

UNIT = ("u",)
FALSE = ("l", UNIT)
TRUE = ("r", UNIT)


def inl(v):
    return ("l", v)


def inr(v):
    return ("r", v)


def pair(a, b):
    return ("p", a, b)


def bag(items: Iterable) -> tuple:
    return ("b", tuple(sorted(items)))


def boolv(b: bool):
    return TRUE if b else FALSE


def inhabits(ty: MsType, v) -> bool:
    try:
        check_value(ty, v)
    except TypeMismatch:
        return False
    return True


def check_value(ty: MsType, v) -> None:
    if not isinstance(v, tuple) or not v:
        raise TypeMismatch(f"not a value: {v!r}")
    tag = v[0]
    if isinstance(ty, Unit):
        if v != UNIT:
            raise TypeMismatch(f"{show_value(v)} is not of type 1")
    elif isinstance(ty, Sum):
        if tag == "l" and len(v) == 2:
            check_value(ty.left, v[1])
        elif tag == "r" and len(v) == 2:
            check_value(ty.right, v[1])
        else:
            raise TypeMismatch(f"{show_value(v)} is not of type {ty}")
    elif isinstance(ty, Prod):
        if tag != "p" or len(v) != 3:
            raise TypeMismatch(f"{show_value(v)} is not of type {ty}")
        check_value(ty.left, v[1])
        check_value(ty.right, v[2])
    elif isinstance(ty, Bag):
        if tag != "b" or len(v) != 2 or not isinstance(v[1], tuple):
            raise TypeMismatch(f"{show_value(v)} is not of type {ty}")
        for x in v[1]:
            check_value(ty.elem, x)
    else:
        raise TypeError(f"unknown type {ty!r}")


def canonical_value(ty: MsType, v):
    """Canonical representative of v: every bag sorted. Raises on mismatch."""
    check_value(ty, v)
    return _canon(ty, v)


def _canon(ty, v):
    if isinstance(ty, Unit):
        return UNIT
    if isinstance(ty, Sum):
        return (v[0], _canon(ty.left if v[0] == "l" else ty.right, v[1]))
    if isinstance(ty, Prod):
        return ("p", _canon(ty.left, v[1]), _canon(ty.right, v[2]))
    return bag(_canon(ty.elem, x) for x in v[1])


def value_size(v) -> int:
    """Number of elements of the relational encoding of v."""
    tag = v[0]
    if tag == "u":
        return 1
    if tag in "lr":
        return value_size(v[1])
    if tag == "p":
        return value_size(v[1]) + value_size(v[2])
    return 1 + sum(value_size(x) for x in v[1])


def enumerate_values(ty: MsType, max_bag: int) -> list:
    """All canonical values of ty whose bags have at most max_bag elements."""
    if isinstance(ty, Unit):
        return [UNIT]
    if isinstance(ty, Sum):
        return [inl(x) for x in enumerate_values(ty.left, max_bag)] + [
            inr(x) for x in enumerate_values(ty.right, max_bag)
        ]
    if isinstance(ty, Prod):
        ls = enumerate_values(ty.left, max_bag)
        rs = enumerate_values(ty.right, max_bag)
        return [pair(a, b) for a in ls for b in rs]
    from itertools import combinations_with_replacement

    elems = enumerate_values(ty.elem, max_bag)
    out = []
    for n in range(max_bag + 1):
        for combo in combinations_with_replacement(elems, n):
            out.append(("b", tuple(combo)))
    return out


# ------------------------------------------------------------ text formats


def parse_type(src) -> MsType:
    sx = parse(src) if isinstance(src, str) else src
    if isinstance(sx, str):
        if sx == "1":
            return ONE
        if sx in ("bool", "2"):
            return BOOL
        raise SexpError(f"unknown type atom {sx!r}", pos_of(sx))
    if not sx:
        raise SexpError("empty type expression", pos_of(sx))
    head, args = sx[0], sx[1:]
    if head in ("+", "*") and len(args) == 2:
        a, b = parse_type(args[0]), parse_type(args[1])
        return Sum(a, b) if head == "+" else Prod(a, b)
    if head == "M" and len(args) == 1:
        return Bag(parse_type(args[0]))
    raise SexpError(f"malformed type {dumps(sx)}", pos_of(sx))


def parse_value(src):
    sx = parse(src) if isinstance(src, str) else src
    if isinstance(sx, str):
        if sx in ("unit", "*"):
            return UNIT
        if sx == "true":
            return TRUE
        if sx == "false":
            return FALSE
        raise SexpError(f"unknown value atom {sx!r}", pos_of(sx))
    if not sx:
        raise SexpError("empty value expression", pos_of(sx))
    head, args = sx[0], sx[1:]
    if head in ("inl", "inr") and len(args) == 1:
        return (head[2], parse_value(args[0]))
    if head == "pair" and len(args) == 2:
        return pair(parse_value(args[0]), parse_value(args[1]))
    if head == "bag":
        return bag(parse_value(a) for a in args)
    raise SexpError(f"malformed value {dumps(sx)}", pos_of(sx))


def show_value(v) -> str:
    tag = v[0]
    if tag == "u":
        return "unit"
    if tag == "l":
        return f"(inl {show_value(v[1])})"
    if tag == "r":
        return f"(inr {show_value(v[1])})"
    if tag == "p":
        return f"(pair {show_value(v[1])} {show_value(v[2])})"
    if tag == "b":
        return "(bag" + "".join(" " + show_value(x) for x in v[1]) + ")"
    return repr(v)


# ---------------------------------------------------------------- edge trees

TreeCode = tuple  # tuple of sorted (color, TreeCode) pairs

UNLABELLED = "*"


class EdgeTree:
    """A rooted unordered tree whose non-root nodes (= edges) carry colors.

    Edge ``e`` has colour ``color[e]`` and parent edge ``parent[e]`` (``None``
    for edges leaving the root). Edge ids are ``0..len-1`` and parents always
    precede children.
    """

    __slots__ = ("parent", "color", "__dict__")

    def __init__(self, parent: Iterable[int | None] = (), color: Iterable[str] = ()):
        self.parent = tuple(parent)
        self.color = tuple(color)
        if len(self.parent) != len(self.color):
            raise ValueError("parent/color length mismatch")
        for e, p in enumerate(self.parent):
            if p is not None and not 0 <= p < e:
                raise ValueError(f"edge {e} has parent {p}; parents must precede children")

    def __len__(self):
        return len(self.parent)

    @cached_property
    def children(self) -> dict:
        ch: dict = {None: []}
        for e in range(len(self)):
            ch[e] = []
        for e, p in enumerate(self.parent):
            ch[p].append(e)
        return ch

    @cached_property
    def depth(self) -> tuple:
        d = []
        for p in self.parent:
            d.append(1 if p is None else d[p] + 1)
        return tuple(d)

    @property
    def height(self) -> int:
        return max(self.depth, default=0)

    def edge_code(self, e: int | None) -> TreeCode:
        return tuple(sorted((self.color[c], self.edge_code(c)) for c in self.children[e]))

    @cached_property
    def code(self) -> TreeCode:
        return self.edge_code(None)

    def __eq__(self, other):
        return isinstance(other, EdgeTree) and self.code == other.code

    def __hash__(self):
        return hash(self.code)

    def __repr__(self):
        return f"EdgeTree({tree_to_sexp(self.code)})"

    @classmethod
    def from_code(cls, code: TreeCode) -> "EdgeTree":
        parent: list = []
        color: list = []

        def go(c, p):
            for col, sub in c:
                e = len(parent)
                parent.append(p)
                color.append(col)
                go(sub, e)

        go(code, None)
        return cls(parent, color)

    def ancestors(self, e: int) -> list:
        """e and its ancestors, bottom-up."""
        out = []
        while e is not None:
            out.append(e)
            e = self.parent[e]
        return out

    def colors(self) -> set:
        return set(self.color)


def tree_iso(t1: EdgeTree, t2: EdgeTree) -> bool:
    return t1.code == t2.code


def tree_from_sexp(sx) -> EdgeTree:
    """``(tree (edge COLOR CHILD...) ...)`` or the bare list of edges."""

    def go(items):
        out = []
        for it in items:
            if not isinstance(it, list) or len(it) < 2 or it[0] != "edge":
                raise SexpError(f"malformed edge {dumps(it)}", pos_of(it))
            out.append((str(it[1]), go(it[2:])))
        return tuple(sorted(out))

    if isinstance(sx, str):
        sx = parse(sx)
    if isinstance(sx, list) and sx and sx[0] == "tree":
        sx = sx[1:]
    return EdgeTree.from_code(go(sx))


def tree_to_sexp(t: EdgeTree | TreeCode) -> str:
    code = t.code if isinstance(t, EdgeTree) else t

    def go(c):
        return "".join(f" (edge {col}{go(s)})" for col, s in c)

    return "(tree" + go(code) + ")"


def value_to_tree(v, k: int | None = None) -> EdgeTree:
    """Value of M^k 1 to the unlabelled tree it represents."""

    def go(x, budget):
        if x == UNIT:
            return ()
        if x[0] != "b":
            raise TypeMismatch(f"{show_value(x)} is not a tree value")
        if budget == 0:
            raise TypeMismatch("tree height exceeds bound")
        return tuple(sorted((UNLABELLED, go(c, budget - 1)) for c in x[1]))

    if k is not None:
        check_value(bags(k), v)
    return EdgeTree.from_code(go(v, -1 if k is None else k))


def tree_to_value(t: EdgeTree, k: int):
    """Unlabelled tree of height <= k to a value of M^k 1 (leaves padded at depth < k)."""
    if t.height > k:
        raise TypeMismatch(f"tree of height {t.height} exceeds bound {k}")

    def go(code, budget):
        if budget == 0:
            return UNIT
        return bag(go(sub, budget - 1) for _, sub in code)

    return go(t.code, k)
