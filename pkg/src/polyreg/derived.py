"""Functions derived from the primes: constants, Boolean connectives, strength,
pointed types, formula evaluation, tree encodings and valuation trees.

Booleans live in 1 + 1 with ``inl *`` = false and ``inr *`` = true, so that
the error summand of de-singleton reads as "not a singleton".
"""

from __future__ import annotations

from bisect import bisect_left
from functools import lru_cache

from .calculus import (
    EMPTY,
    Copair,
    Map,
    Pair,
    Term,
    add,
    choices,
    comp,
    desingleton,
    dist,
    ident,
    inl_,
    inr_,
    pi1,
    pi2,
    union,
)
from .core import BOOL, ONE, UNIT, Bag, MsType, Prod, Sum, Unit, bags, node_tree_type, sum_of
from .logic import (
    And,
    Const,
    Eq,
    Exists,
    Forall,
    Formula,
    LogicError,
    Not,
    Or,
    Rel,
    free_vars,
    split_name,
    term_var,
    voc_of,
)

B = BOOL


class DeriveError(ValueError):
    pass


# ---- basics -----------------------------------------------------------------


@lru_cache(maxsize=None)
def bang(s: MsType) -> Term:
    """The unique function s -> 1."""
    if isinstance(s, Unit):
        return ident(ONE)
    if isinstance(s, Sum):
        return Copair(bang(s.left), bang(s.right))
    if isinstance(s, Prod):
        return comp(pi1(s.left, s.right), bang(s.left))
    return comp(desingleton(s.elem), Copair(ident(ONE), bang(s.elem)))


@lru_cache(maxsize=None)
def const(s: MsType) -> Term:
    """A fixed function 1 -> s (leftmost summands, empty bags)."""
    if isinstance(s, Unit):
        return ident(ONE)
    if isinstance(s, Sum):
        return comp(const(s.left), inl_(s.left, s.right))
    if isinstance(s, Prod):
        return Pair(const(s.left), const(s.right))
    return comp(EMPTY, Map(const(s.elem)))


def const_from(src: MsType, s: MsType) -> Term:
    return comp(bang(src), const(s))


TRUE_T = inr_(ONE, ONE)
FALSE_T = inl_(ONE, ONE)


def true_from(src: MsType) -> Term:
    return comp(bang(src), TRUE_T)


def false_from(src: MsType) -> Term:
    return comp(bang(src), FALSE_T)


@lru_cache(maxsize=None)
def singleton(s: MsType) -> Term:
    return comp(Pair(ident(s), const_from(s, Bag(s))), add(s))


def swap(a: MsType, b: MsType) -> Term:
    return Pair(pi2(a, b), pi1(a, b))


@lru_cache(maxsize=None)
def empty_test() -> Term:
    """M1 -> bool, true exactly on the empty multiset."""
    m1 = Bag(ONE)
    return comp(Pair(bang(m1), ident(m1)), add(ONE), desingleton(ONE))


NOT = Copair(TRUE_T, FALSE_T)


@lru_cache(maxsize=None)
def bag_or() -> Term:
    """M bool -> bool: some element is true."""
    return comp(Map(Copair(const_from(ONE, Bag(ONE)), singleton(ONE))), union(ONE), empty_test(), NOT)


@lru_cache(maxsize=None)
def bag_and() -> Term:
    return comp(Map(NOT), bag_or(), NOT)


def is_empty(s: MsType) -> Term:
    return comp(Map(bang(s)), empty_test())


# B x B -> B, by distributing over the second component
AND2 = comp(dist(B, ONE, ONE), Copair(false_from(Prod(B, ONE)), pi1(B, ONE)))
OR2 = comp(dist(B, ONE, ONE), Copair(pi1(B, ONE), true_from(Prod(B, ONE))))


def and_of(f: Term, g: Term) -> Term:
    return comp(Pair(f, g), AND2)


def or_of(f: Term, g: Term) -> Term:
    return comp(Pair(f, g), OR2)


def not_of(f: Term) -> Term:
    return comp(f, NOT)


@lru_cache(maxsize=None)
def drop(s: MsType, g: MsType) -> Term:
    """M(s + g) -> M s, erasing the g elements."""
    return comp(Map(Copair(singleton(s), const_from(g, Bag(s)))), union(s))


@lru_cache(maxsize=None)
def drop_left(s: MsType, g: MsType) -> Term:
    """M(s + g) -> M g."""
    return comp(Map(Copair(inr_(g, s), inl_(g, s))), drop(g, s))


@lru_cache(maxsize=None)
def merge(s: MsType) -> Term:
    """M s x M s -> M s."""
    ms = Bag(s)
    return comp(Pair(pi1(ms, ms), comp(pi2(ms, ms), singleton(ms))), add(ms), union(s))


def filter_false(s: MsType, pred: Term) -> Term:
    """M s -> M s keeping the elements on which pred is false."""
    return comp(
        Map(comp(Pair(ident(s), pred), dist(s, ONE, ONE), Copair(comp(pi1(s, ONE), inl_(s, s)), comp(pi1(s, ONE), inr_(s, s))))),
        drop(s, s),
    )


@lru_cache(maxsize=None)
def strength(s: MsType, g: MsType) -> Term:
    """M s x g -> M(s x g), pairing every element with the second argument."""
    sg = Sum(s, g)
    msg = Bag(sg)
    step1 = Pair(comp(pi1(Bag(s), g), Map(inl_(s, g))), comp(pi2(Bag(s), g), inr_(s, g)))
    step2 = comp(swap(msg, sg), add(sg))
    step3 = choices(sg)
    # (s+g) x M(s+g) -> M(s+g) x s + M(s+g) x g
    step4 = Map(comp(swap(sg, msg), dist(msg, s, g)))
    step5a = drop(Prod(msg, s), Prod(msg, g))
    keep_g = Pair(comp(pi1(msg, s), drop_left(s, g)), pi2(msg, s))
    step5b = Map(keep_g)
    # M g x s -> (1 + g) x s -> s x (1 + g) -> s x 1 + s x g
    mg = Bag(g)
    step6 = Map(
        comp(
            Pair(pi2(mg, s), comp(pi1(mg, s), desingleton(g))),
            dist(s, ONE, g),
        )
    )
    step7 = drop_left(Prod(s, ONE), Prod(s, g))
    return comp(step1, step2, step3, step4, step5a, step5b, step6, step7)


def strength_right(g: MsType, s: MsType) -> Term:
    """g x M s -> M(g x s)."""
    return comp(swap(g, Bag(s)), strength(s, g), Map(swap(s, g)))


# ---- pointed types ------------------------------------------------------------


@lru_cache(maxsize=None)
def pointed1(s: MsType) -> MsType:
    if isinstance(s, Unit):
        return ONE
    if isinstance(s, Prod):
        return Sum(Prod(pointed1(s.left), s.right), Prod(s.left, pointed1(s.right)))
    if isinstance(s, Sum):
        return Sum(pointed1(s.left), pointed1(s.right))
    return Prod(Sum(ONE, pointed1(s.elem)), s)


def pointed_type(s: MsType, k: int) -> MsType:
    for _ in range(k):
        s = pointed1(s)
    return s


def point1(s: MsType, v, e: tuple):
    """Distinguish element e of struct_of_value(s, v). Returns the value of
    V1 s and a map sending elements of v to elements of the new value."""
    if isinstance(s, Unit):
        return UNIT, lambda x: x
    if isinstance(s, Prod):
        if e[0] == "1":
            pv, tr = point1(s.left, v[1], e[1:])
            return ("l", ("p", pv, v[2])), lambda x: ("1",) + tr(x[1:]) if x[0] == "1" else x
        pv, tr = point1(s.right, v[2], e[1:])
        return ("r", ("p", v[1], pv)), lambda x: ("2",) + tr(x[1:]) if x[0] == "2" else x
    if isinstance(s, Sum):
        pv, tr = point1(s.left if v[0] == "l" else s.right, v[1], e)
        return (v[0], pv), tr
    items = v[1]
    if e[0] == "#":
        return ("p", ("l", UNIT), v), lambda x: ("2",) + x
    i = e[0]
    ipv, itr = point1(s.elem, items[i], e[1:])
    rest = items[:i] + items[i + 1 :]

    def tr(x):
        if x[0] == "#":
            return ("2", "#")
        if x[0] == i:
            return ("1",) + itr(x[1:])
        j = x[0]
        return ("2", j if j < i else j - 1) + x[1:]

    return ("p", ("r", ipv), ("b", rest)), tr


def unpoint1(s: MsType, pv):
    """Inverse of point1: (value, element, map back). The map sends elements
    of the pointed value to elements of the plain one (None if spurious)."""
    if isinstance(s, Unit):
        return UNIT, (), lambda x: x
    if isinstance(s, Prod):
        inner = pv[1]
        if pv[0] == "l":
            v1, e1, b1 = unpoint1(s.left, inner[1])
            return ("p", v1, inner[2]), ("1",) + e1, lambda x: _pre("1", b1(x[1:])) if x[0] == "1" else x
        v2, e2, b2 = unpoint1(s.right, inner[2])
        return ("p", inner[1], v2), ("2",) + e2, lambda x: _pre("2", b2(x[1:])) if x[0] == "2" else x
    if isinstance(s, Sum):
        v, e, b = unpoint1(s.left if pv[0] == "l" else s.right, pv[1])
        return (pv[0], v), e, b
    head, rest = pv[1], pv[2]
    if head[0] == "l":
        return rest, ("#",), lambda x: x[1:] if x[0] == "2" else None
    a, ea, ba = unpoint1(s.elem, head[1])
    idx = bisect_left(rest[1], a)
    whole = ("b", rest[1][:idx] + (a,) + rest[1][idx:])

    def back(x):
        if x[0] == "1":
            return _pre(idx, ba(x[1:]))
        if x[1] == "#":
            return ("#",)
        j = x[1]
        return (j if j < idx else j + 1,) + x[2:]

    return whole, (idx,) + ea, back


def _pre(h, x):
    return None if x is None else (h,) + x


def point_value(s: MsType, v, coords) -> object:
    """Encode (v, coords) as a value of V_k s, coordinates in order."""
    coords = list(coords)
    cur_t, cur_v = s, v
    for i in range(len(coords)):
        pv, tr = point1(cur_t, cur_v, coords[i])
        coords = coords[: i + 1] + [tr(c) for c in coords[i + 1 :]]
        cur_t, cur_v = pointed1(cur_t), pv
    return cur_v


def unpoint_value(s: MsType, k: int, pv):
    """Decode a value of V_k s into (v, coords)."""
    types = [s]
    for _ in range(k):
        types.append(pointed1(types[-1]))
    coords: list = []
    cur = pv
    for j in range(k, 0, -1):
        cur, e, back = unpoint1(types[j - 1], cur)
        coords = [e] + [back(c) for c in coords]
    return cur, tuple(coords)


# ---- marked types --------------------------------------------------------------
#
# Sigma^{M_j} attaches j Boolean marks to every element of a Sigma-structure:
# units become M_j, bags become M_j x M(...). M_0 = 1 and M_{j+1} = bool x M_j,
# so mark 0 is the outermost one. A tuple of j elements is the same thing as a
# marking in which each mark holds on exactly one element.


def marks(j: int) -> MsType:
    t: MsType = ONE
    for _ in range(j):
        t = Prod(B, t)
    return t


@lru_cache(maxsize=None)
def marked(s: MsType, j: int) -> MsType:
    if isinstance(s, Unit):
        return marks(j)
    if isinstance(s, Prod):
        return Prod(marked(s.left, j), marked(s.right, j))
    if isinstance(s, Sum):
        return Sum(marked(s.left, j), marked(s.right, j))
    return Prod(marks(j), Bag(marked(s.elem, j)))


def _push(j: int, bit: Term) -> Term:
    """M_j -> M_{j+1} with the new mark in front."""
    return Pair(comp(bang(marks(j)), bit), ident(marks(j)))


@lru_cache(maxsize=None)
def add_false(s: MsType, j: int) -> Term:
    """Sigma^{M_j} -> Sigma^{M_{j+1}} with a fresh all-false mark."""
    if isinstance(s, Unit):
        return _push(j, FALSE_T)
    a = marked(s.left if not isinstance(s, Bag) else s.elem, j)
    if isinstance(s, Prod):
        b = marked(s.right, j)
        return Pair(comp(pi1(a, b), add_false(s.left, j)), comp(pi2(a, b), add_false(s.right, j)))
    if isinstance(s, Sum):
        a2, b2 = marked(s.left, j + 1), marked(s.right, j + 1)
        return Copair(comp(add_false(s.left, j), inl_(a2, b2)), comp(add_false(s.right, j), inr_(a2, b2)))
    mj, items = marks(j), Bag(a)
    return Pair(comp(pi1(mj, items), _push(j, FALSE_T)), comp(pi2(mj, items), Map(add_false(s.elem, j))))


@lru_cache(maxsize=None)
def zero_marks(s: MsType) -> Term:
    """Sigma -> Sigma^{M_0}."""
    if isinstance(s, Unit):
        return ident(ONE)
    if isinstance(s, Prod):
        return Pair(comp(pi1(s.left, s.right), zero_marks(s.left)), comp(pi2(s.left, s.right), zero_marks(s.right)))
    if isinstance(s, Sum):
        a, b = marked(s.left, 0), marked(s.right, 0)
        return Copair(comp(zero_marks(s.left), inl_(a, b)), comp(zero_marks(s.right), inr_(a, b)))
    return Pair(bang(s), Map(zero_marks(s.elem)))


@lru_cache(maxsize=None)
def transfer(s: MsType, j: int) -> Term:
    """(V1 s)^{M_j} -> s^{M_{j+1}}: the distinguished element becomes mark 0.

    The unit standing for a distinguished bag root carries no marks of its
    own (later coordinates are always real elements), so it is dropped."""
    if isinstance(s, Unit):
        return _push(j, TRUE_T)
    if isinstance(s, Prod):
        a, b = s.left, s.right
        pa, pb = pointed1(a), pointed1(b)
        lt = Prod(marked(pa, j), marked(b, j))
        rt = Prod(marked(a, j), marked(pb, j))
        left = Pair(comp(pi1(*lt_args(lt)), transfer(a, j)), comp(pi2(*lt_args(lt)), add_false(b, j)))
        right = Pair(comp(pi1(*lt_args(rt)), add_false(a, j)), comp(pi2(*lt_args(rt)), transfer(b, j)))
        return Copair(left, right)
    if isinstance(s, Sum):
        a2, b2 = marked(s.left, j + 1), marked(s.right, j + 1)
        return Copair(comp(transfer(s.left, j), inl_(a2, b2)), comp(transfer(s.right, j), inr_(a2, b2)))
    elem = s.elem
    mj = marks(j)
    head = Sum(mj, marked(pointed1(elem), j))
    y = Prod(mj, Bag(marked(elem, j)))
    keep_items = comp(pi2(mj, Bag(marked(elem, j))), Map(add_false(elem, j)))
    root_case = Pair(
        comp(pi1(y, mj), pi1(mj, Bag(marked(elem, j))), _push(j, TRUE_T)),
        comp(pi1(y, mj), keep_items),
    )
    pe = marked(pointed1(elem), j)
    item_case = Pair(
        comp(pi1(y, pe), pi1(mj, Bag(marked(elem, j))), _push(j, FALSE_T)),
        comp(Pair(comp(pi2(y, pe), transfer(elem, j)), comp(pi1(y, pe), keep_items)), add(marked(elem, j + 1))),
    )
    return comp(swap(head, y), dist(y, mj, pe), Copair(root_case, item_case))


def lt_args(p: Prod):
    return p.left, p.right


@lru_cache(maxsize=None)
def unpoint_term(s: MsType, n: int) -> Term:
    """V_n s -> s^{M_n}; mark i records coordinate i."""
    types = [s]
    for _ in range(n):
        types.append(pointed1(types[-1]))
    t = zero_marks(types[n])
    for j in range(n):
        t = comp(t, transfer(types[n - 1 - j], j))
    return t


@lru_cache(maxsize=None)
def ext_marked(s: MsType, j: int) -> Term:
    """Sigma^{M_j} -> M Sigma^{M_{j+1}}: every way of placing a new mark 0."""
    dst = marked(s, j + 1)
    if isinstance(s, Unit):
        return comp(_push(j, TRUE_T), singleton(dst))
    if isinstance(s, Prod):
        a, b = marked(s.left, j), marked(s.right, j)
        a2, b2 = marked(s.left, j + 1), marked(s.right, j + 1)
        left = comp(Pair(comp(pi1(a, b), ext_marked(s.left, j)), comp(pi2(a, b), add_false(s.right, j))), strength(a2, b2))
        right = comp(
            Pair(comp(pi1(a, b), add_false(s.left, j)), comp(pi2(a, b), ext_marked(s.right, j))), strength_right(a2, b2)
        )
        return comp(Pair(left, right), merge(dst))
    if isinstance(s, Sum):
        a2, b2 = marked(s.left, j + 1), marked(s.right, j + 1)
        return Copair(
            comp(ext_marked(s.left, j), Map(inl_(a2, b2))),
            comp(ext_marked(s.right, j), Map(inr_(a2, b2))),
        )
    mj, mj1 = marks(j), marks(j + 1)
    e, e2 = marked(s.elem, j), marked(s.elem, j + 1)
    root = comp(
        Pair(comp(pi1(mj, Bag(e)), _push(j, TRUE_T)), comp(pi2(mj, Bag(e)), Map(add_false(s.elem, j)))),
        singleton(dst),
    )
    # one chosen item receives the mark, the others get a false mark
    per_choice = comp(
        Pair(comp(pi1(e, Bag(e)), ext_marked(s.elem, j)), comp(pi2(e, Bag(e)), Map(add_false(s.elem, j)))),
        strength(e2, Bag(e2)),
        Map(add(e2)),
    )
    item_bags = comp(pi2(mj, Bag(e)), choices(e), Map(per_choice), union(Bag(e2)))
    items = comp(
        Pair(comp(pi1(mj, Bag(e)), _push(j, FALSE_T)), item_bags),
        strength_right(mj1, Bag(e2)),
    )
    return comp(Pair(root, items), merge(dst))


def mark_bit(j: int, i: int) -> Term:
    """M_j -> bool, reading mark i."""
    t: Term = ident(marks(j))
    cur = j
    for _ in range(i):
        t = comp(t, pi2(B, marks(cur - 1)))
        cur -= 1
    return comp(t, pi1(B, marks(cur - 1)))


@lru_cache(maxsize=None)
def exists_marked(s: MsType, j: int, pred: Term) -> Term:
    """Sigma^{M_j} -> bool: some element's marks satisfy pred (M_j -> bool)."""
    if isinstance(s, Unit):
        return pred
    if isinstance(s, Prod):
        a, b = marked(s.left, j), marked(s.right, j)
        return or_of(comp(pi1(a, b), exists_marked(s.left, j, pred)), comp(pi2(a, b), exists_marked(s.right, j, pred)))
    if isinstance(s, Sum):
        return Copair(exists_marked(s.left, j, pred), exists_marked(s.right, j, pred))
    mj, e = marks(j), marked(s.elem, j)
    return or_of(comp(pi1(mj, Bag(e)), pred), comp(pi2(mj, Bag(e)), Map(exists_marked(s.elem, j, pred)), bag_or()))


def _all_marks(j: int, idx: tuple) -> Term:
    t = mark_bit(j, idx[0])
    for i in idx[1:]:
        t = and_of(t, mark_bit(j, i))
    return t


def _walk(s: MsType, j: int, kind: str, steps: str, idx: tuple, lift_at: int) -> Term:
    src = marked(s, j)
    if not steps:
        if kind == "prod":
            if not isinstance(s, Prod):
                return false_from(src)
            return comp(pi1(marked(s.left, j), marked(s.right, j)), _in_part(s.left, j, idx))
        if kind == "tag":
            if not isinstance(s, Sum):
                return false_from(src)
            return Copair(false_from(marked(s.left, j)), true_from(marked(s.right, j)))
        if not isinstance(s, Bag):
            return false_from(src)
        e = marked(s.elem, j)
        return comp(pi2(marks(j), Bag(e)), Map(_in_part(s.elem, j, idx)), bag_or())
    step, rest = steps[0], steps[1:]
    if step in "12":
        if not isinstance(s, Prod):
            return false_from(src)
        a, b = marked(s.left, j), marked(s.right, j)
        side = s.left if step == "1" else s.right
        proj = pi1(a, b) if step == "1" else pi2(a, b)
        return comp(proj, _walk(side, j, kind, rest, idx, lift_at - 1))
    if step in "lr":
        if not isinstance(s, Sum):
            return false_from(src)
        go_l = _walk(s.left, j, kind, rest, idx, lift_at - 1) if step == "l" else false_from(marked(s.left, j))
        go_r = _walk(s.right, j, kind, rest, idx, lift_at - 1) if step == "r" else false_from(marked(s.right, j))
        return Copair(go_l, go_r)
    if not isinstance(s, Bag):
        return false_from(src)
    e = marked(s.elem, j)
    if lift_at == 0:
        inner = and_of(_in_part(s.elem, j, idx), _walk(s.elem, j, kind, rest, (), -1))
    else:
        inner = _walk(s.elem, j, kind, rest, idx, lift_at - 1)
    return comp(pi2(marks(j), Bag(e)), Map(inner), bag_or())


def _in_part(s: MsType, j: int, idx: tuple) -> Term:
    """All listed coordinates lie inside this part."""
    t = exists_marked(s, j, mark_bit(j, idx[0]))
    for i in idx[1:]:
        t = and_of(t, exists_marked(s, j, mark_bit(j, i)))
    return t


def formula_term(s: MsType, f: Formula, order: tuple) -> Term:
    """Sigma^{M_j} -> bool for a formula whose free variables are order[i] at mark i."""
    j = len(order)
    src = marked(s, j)
    if isinstance(f, Const):
        return true_from(src) if f.value else false_from(src)
    if isinstance(f, Eq):
        a, b = order.index(term_var(f.left)), order.index(term_var(f.right))
        return exists_marked(s, j, _all_marks(j, (a, b)))
    if isinstance(f, Rel):
        kind, path = split_name(f.name)
        idx = tuple(order.index(term_var(a)) for a in f.args)
        lift_at = path.rfind("m") if kind == "tag" and idx else -1
        return _walk(s, j, kind, path, idx, lift_at)
    if isinstance(f, Not):
        return not_of(formula_term(s, f.body, order))
    if isinstance(f, (And, Or)):
        t = formula_term(s, f.parts[0], order)
        for p in f.parts[1:]:
            u = formula_term(s, p, order)
            t = and_of(t, u) if isinstance(f, And) else or_of(t, u)
        return t
    body = formula_term(s, f.body, (f.var,) + tuple(order))
    agg = bag_or() if isinstance(f, Exists) else bag_and()
    return comp(ext_marked(s, j), Map(body), agg)


def derive_formula(s: MsType, f: Formula, free: tuple | list | None = None) -> Term:
    """Term of type V_n s -> bool computing the truth value of f, where the
    i-th coordinate of the pointed input is the variable free[i]."""
    free = tuple(sorted(free_vars(f))) if free is None else tuple(free)
    if not free_vars(f) <= set(free):
        raise LogicError("formula has free variables outside the given order")
    voc = voc_of(s)
    from .logic import relations_used

    unknown = relations_used(f) - set(voc.names())
    if unknown:
        raise LogicError(f"relations outside the vocabulary: {', '.join(sorted(unknown))}")
    _check_bound_distinct(f, set(free))
    return comp(unpoint_term(s, len(free)), formula_term(s, f, free))


def _check_bound_distinct(f: Formula, seen: set) -> None:
    if isinstance(f, (Exists, Forall)):
        if f.var in seen:
            raise LogicError(f"variable {f.var} is rebound; rename apart first")
        _check_bound_distinct(f.body, seen | {f.var})
    elif isinstance(f, Not):
        _check_bound_distinct(f.body, seen)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _check_bound_distinct(p, seen)


def rename_apart(f: Formula, taken: set | None = None) -> Formula:
    """Rename bound variables so that no variable is bound twice on a branch
    or shadows a free one."""
    from .logic import rename

    taken = set(free_vars(f)) if taken is None else set(taken)

    def go(g, scope):
        if isinstance(g, (Exists, Forall)):
            v = g.var
            if v in scope:
                k = 0
                while f"{v}_{k}" in scope:
                    k += 1
                nv = f"{v}_{k}"
                body = rename(g.body, {v: nv})
                v = nv
            else:
                body = g.body
            return type(g)(v, go(body, scope | {v}))
        if isinstance(g, Not):
            return Not(go(g.body, scope))
        if isinstance(g, (And, Or)):
            return type(g)(tuple(go(p, scope) for p in g.parts))
        return g

    return go(f, taken)


# ---- extension (pointed form) ------------------------------------------------


@lru_cache(maxsize=None)
def ext(s: MsType) -> Term:
    """s -> M V1 s: every way of distinguishing one element."""
    p = pointed1(s)
    if isinstance(s, Unit):
        return singleton(ONE)
    if isinstance(s, Prod):
        a, b = s.left, s.right
        pa, pb = pointed1(a), pointed1(b)
        left = comp(Pair(comp(pi1(a, b), ext(a)), pi2(a, b)), strength(pa, b), Map(inl_(Prod(pa, b), Prod(a, pb))))
        right = comp(
            Pair(pi1(a, b), comp(pi2(a, b), ext(b))), strength_right(a, pb), Map(inr_(Prod(pa, b), Prod(a, pb)))
        )
        return comp(Pair(left, right), merge(p))
    if isinstance(s, Sum):
        return Copair(
            comp(ext(s.left), Map(inl_(pointed1(s.left), pointed1(s.right)))),
            comp(ext(s.right), Map(inr_(pointed1(s.left), pointed1(s.right)))),
        )
    e, pe = s.elem, pointed1(s.elem)
    root = comp(Pair(comp(bang(s), inl_(ONE, pe)), ident(s)), singleton(p))
    per = comp(
        Pair(comp(pi1(e, s), ext(e)), pi2(e, s)),
        strength(pe, s),
        Map(Pair(comp(pi1(pe, s), inr_(ONE, pe)), pi2(pe, s))),
    )
    items = comp(choices(e), Map(per), union(p))
    return comp(Pair(root, items), merge(p))


# ---- node trees and valuation trees -----------------------------------------------


def tree_map(k: int, a: MsType, b: MsType, f: Term) -> Term:
    """N_k a -> N_k b relabelling every node by f."""
    if k == 0:
        return f
    inner_a = node_tree_type(k - 1, a)
    return Pair(comp(pi1(a, Bag(inner_a)), f), comp(pi2(a, Bag(inner_a)), Map(tree_map(k - 1, a, b, f))))


def pointed_upto(s: MsType, k: int) -> MsType:
    return sum_of([pointed_type(s, i) for i in range(k + 1)])


@lru_cache(maxsize=None)
def valtree(s: MsType, k: int) -> Term:
    """s -> N_k(V_{<=k} s), the valuation tree of height k."""
    if k == 0:
        return ident(s)
    p = pointed1(s)
    sub = valtree(p, k - 1)
    lab_sub = pointed_upto(p, k - 1)
    lab = pointed_upto(s, k)
    inner = node_tree_type(k - 1, lab_sub)
    into = tree_map(k - 1, lab_sub, lab, inr_(s, lab_sub))
    return comp(
        Pair(ident(s), ext(s)),
        Pair(pi1(s, Bag(p)), comp(pi2(s, Bag(p)), Map(sub))),
        Pair(comp(pi1(s, Bag(inner)), inl_(s, lab_sub)), comp(pi2(s, Bag(inner)), Map(into))),
    )


# ---- encoding into unlabelled trees ----------------------------------------------


@lru_cache(maxsize=None)
def enc_height(s: MsType) -> int:
    if isinstance(s, Unit):
        return 0
    if isinstance(s, Bag):
        return enc_height(s.elem) + 1
    return max(enc_height(s.left), enc_height(s.right)) + 3


def lift(h: int, d: int) -> Term:
    """M^h 1 -> M^{h+d} 1 by repeated singletons."""
    t: Term = ident(bags(h))
    for i in range(d):
        t = comp(t, singleton(bags(h + i)))
    return t


def unlift(h: int, d: int) -> Term:
    """M^{h+d} 1 -> M^h 1, undoing lift (other inputs go to a default)."""
    t: Term = ident(bags(h + d))
    for i in range(d, 0, -1):
        below = bags(h + i - 1)
        t = comp(t, desingleton(below), Copair(const(below), ident(below)))
    return t


def _sole(s: MsType) -> Term:
    """M s -> s: the unique element, or a default."""
    return comp(desingleton(s), Copair(const(s), ident(s)))


def _is_singleton(s: MsType) -> Term:
    return comp(desingleton(s), Copair(false_from(ONE), true_from(s)))


@lru_cache(maxsize=None)
def encode(s: MsType) -> Term:
    """s -> M^h 1, injective, with h = enc_height(s)."""
    if isinstance(s, Unit):
        return ident(ONE)
    if isinstance(s, Bag):
        return Map(encode(s.elem))
    k = enc_height(s) - 3
    a, b = s.left, s.right
    top = bags(k)
    one_up, two_up = bags(k + 1), bags(k + 2)
    wrap1 = comp(singleton(top), singleton(one_up))  # x -> {{ {{x}} }}
    wrap2 = comp(Pair(singleton(top), comp(const_from(top, one_up), singleton(one_up))), add(one_up))  # x -> {{ {{x}}, {{}} }}
    ea = comp(encode(a), lift(enc_height(a), k - enc_height(a)))
    eb = comp(encode(b), lift(enc_height(b), k - enc_height(b)))
    if isinstance(s, Prod):
        # (x, y) -> {{ {{ {{x}} }}, {{ {{y}}, {{}} }} }}
        return comp(
            Pair(comp(pi1(a, b), ea, wrap1), comp(pi2(a, b), eb, wrap2, singleton(two_up))),
            add(two_up),
        )
    return Copair(comp(ea, wrap1, singleton(two_up)), comp(eb, wrap2, singleton(two_up)))


@lru_cache(maxsize=None)
def decode(s: MsType) -> Term:
    """M^h 1 -> s with comp(encode(s), decode(s)) = id."""
    if isinstance(s, Unit):
        return ident(ONE)
    if isinstance(s, Bag):
        return Map(decode(s.elem))
    k = enc_height(s) - 3
    a, b = s.left, s.right
    top, one_up, two_up = bags(k), bags(k + 1), bags(k + 2)
    da = comp(unlift(enc_height(a), k - enc_height(a)), decode(a))
    db = comp(unlift(enc_height(b), k - enc_height(b)), decode(b))
    unwrap1 = comp(_sole(one_up), _sole(top))
    unwrap2 = comp(filter_false(one_up, is_empty(top)), _sole(one_up), _sole(top))
    if isinstance(s, Prod):
        first = comp(filter_false(two_up, not_of(_is_singleton(one_up))), _sole(two_up), unwrap1, da)
        second = comp(filter_false(two_up, _is_singleton(one_up)), _sole(two_up), unwrap2, db)
        return Pair(first, second)
    return comp(
        _sole(two_up),
        Pair(ident(two_up), _is_singleton(one_up)),
        dist(two_up, ONE, ONE),
        Copair(comp(pi1(two_up, ONE), unwrap2, db, inr_(a, b)), comp(pi1(two_up, ONE), unwrap1, da, inl_(a, b))),
    )


# ---- library entry point -------------------------------------------------------------

LIBRARY = {
    "bang": 1,
    "const": (1, 2),
    "empty_test": 0,
    "or": 0,
    "and": 0,
    "not": 0,
    "drop": 2,
    "strength": 2,
    "eq": 1,
    "ext": 1,
    "encode": 1,
    "decode": 1,
    "valtree": 2,
    "singleton": 1,
    "merge": 1,
}


def derive(name: str, typeargs=()) -> Term:
    """A derived function from the library by name."""
    typeargs = list(typeargs)
    if name not in LIBRARY:
        raise DeriveError(f"unknown derived function {name!r}")
    want = LIBRARY[name]
    ok = len(typeargs) in want if isinstance(want, tuple) else len(typeargs) == want
    if not ok:
        raise DeriveError(f"{name} takes {want} type arguments, got {len(typeargs)}")
    if name == "bang":
        return bang(typeargs[0])
    if name == "const":
        if len(typeargs) == 1:
            return const(typeargs[0])
        return const_from(typeargs[0], typeargs[1])
    if name == "empty_test":
        return empty_test()
    if name == "or":
        return bag_or()
    if name == "and":
        return bag_and()
    if name == "not":
        return NOT
    if name == "drop":
        return drop(*typeargs)
    if name == "strength":
        return strength(*typeargs)
    if name == "eq":
        from .logic import eq as eq_f

        return derive_formula(typeargs[0], eq_f("x", "y"), ("x", "y"))
    if name == "ext":
        return ext(typeargs[0])
    if name == "encode":
        return encode(typeargs[0])
    if name == "decode":
        return decode(typeargs[0])
    if name == "valtree":
        s, k = typeargs
        if not isinstance(k, int) or k < 0:
            raise DeriveError("valtree needs a type and a height")
        return valtree(s, k)
    if name == "singleton":
        return singleton(typeargs[0])
    return merge(typeargs[0])
