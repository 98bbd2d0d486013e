"""Prime functions and combinators on multiset types: syntax, typing, evaluation.

Composition is written in diagrammatic order: ``comp(f, g)`` runs f first.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

from .core import ONE, Bag, MsType, Prod, Sum, UNIT, check_value, parse_type
from .sexp import SexpError, dumps, parse, pos_of


class TypeCheckError(TypeError):
    def __init__(self, msg: str, term: "Term | None" = None):
        self.term = term
        super().__init__(msg if term is None else f"{msg} in {show_term(term)}")


PRIME_ARITY = {
    "union": 1,
    "add": 1,
    "choices": 1,
    "desingleton": 1,
    "empty": 0,
    "id": 1,
    "pi1": 2,
    "pi2": 2,
    "inl": 2,
    "inr": 2,
    "dist": 3,
}

ALIASES = {
    "emptybag": "empty",
    "de-singleton": "desingleton",
    "proj1": "pi1",
    "proj2": "pi2",
    "coproj1": "inl",
    "coproj2": "inr",
    "iota1": "inl",
    "iota2": "inr",
    "bagmap": "map",
}


@dataclass(frozen=True)
class Prime:
    name: str
    params: tuple = ()

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Prime", self.name, self.params))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Pair", self.left, self.right))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Copair:
    left: "Term"
    right: "Term"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Copair", self.left, self.right))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Map:
    body: "Term"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Map", self.body))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Comp:
    first: "Term"
    then: "Term"

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(("Comp", self.first, self.then))
            object.__setattr__(self, "_hash", h)
        return h


Term = Union[Prime, Pair, Copair, Map, Comp]


# ---- constructors -----------------------------------------------------------


def union(s: MsType) -> Prime:
    return Prime("union", (s,))


def add(s: MsType) -> Prime:
    return Prime("add", (s,))


def choices(s: MsType) -> Prime:
    return Prime("choices", (s,))


def desingleton(s: MsType) -> Prime:
    return Prime("desingleton", (s,))


EMPTY = Prime("empty", ())


def ident(s: MsType) -> Prime:
    return Prime("id", (s,))


def pi1(a: MsType, b: MsType) -> Prime:
    return Prime("pi1", (a, b))


def pi2(a: MsType, b: MsType) -> Prime:
    return Prime("pi2", (a, b))


def inl_(a: MsType, b: MsType) -> Prime:
    return Prime("inl", (a, b))


def inr_(a: MsType, b: MsType) -> Prime:
    return Prime("inr", (a, b))


def dist(s: MsType, a: MsType, b: MsType) -> Prime:
    return Prime("dist", (s, a, b))


def comp(*terms: Term) -> Term:
    """Left-to-right composition of one or more terms."""
    if not terms:
        raise ValueError("comp needs at least one term")
    out = terms[0]
    for t in terms[1:]:
        out = Comp(out, t)
    return out


# ---- typing -----------------------------------------------------------------


def prime_type(p: Prime) -> tuple[MsType, MsType]:
    n, ps = p.name, p.params
    if n not in PRIME_ARITY:
        raise TypeCheckError(f"unknown prime {n!r}", p)
    if len(ps) != PRIME_ARITY[n]:
        raise TypeCheckError(f"{n} takes {PRIME_ARITY[n]} type parameters, got {len(ps)}", p)
    if n == "union":
        return Bag(Bag(ps[0])), Bag(ps[0])
    if n == "add":
        return Prod(ps[0], Bag(ps[0])), Bag(ps[0])
    if n == "choices":
        return Bag(ps[0]), Bag(Prod(ps[0], Bag(ps[0])))
    if n == "desingleton":
        return Bag(ps[0]), Sum(ONE, ps[0])
    if n == "empty":
        return ONE, Bag(ONE)
    if n == "id":
        return ps[0], ps[0]
    if n == "pi1":
        return Prod(ps[0], ps[1]), ps[0]
    if n == "pi2":
        return Prod(ps[0], ps[1]), ps[1]
    if n == "inl":
        return ps[0], Sum(ps[0], ps[1])
    if n == "inr":
        return ps[1], Sum(ps[0], ps[1])
    s, a, b = ps
    return Prod(s, Sum(a, b)), Sum(Prod(s, a), Prod(s, b))


@lru_cache(maxsize=None)
def typecheck(t: Term) -> tuple[MsType, MsType]:
    if isinstance(t, Prime):
        return prime_type(t)
    if isinstance(t, Pair):
        d1, c1 = typecheck(t.left)
        d2, c2 = typecheck(t.right)
        if d1 != d2:
            raise TypeCheckError(f"pairing domains differ: {d1} vs {d2}", t)
        return d1, Prod(c1, c2)
    if isinstance(t, Copair):
        d1, c1 = typecheck(t.left)
        d2, c2 = typecheck(t.right)
        if c1 != c2:
            raise TypeCheckError(f"copairing codomains differ: {c1} vs {c2}", t)
        return Sum(d1, d2), c1
    if isinstance(t, Map):
        d, c = typecheck(t.body)
        return Bag(d), Bag(c)
    if isinstance(t, Comp):
        d1, c1 = typecheck(t.first)
        d2, c2 = typecheck(t.then)
        if c1 != d2:
            raise TypeCheckError(f"composition mismatch: {c1} is not {d2}", t)
        return d1, c2
    raise TypeCheckError(f"not a term: {t!r}")


def domain(t: Term) -> MsType:
    return typecheck(t)[0]


def codomain(t: Term) -> MsType:
    return typecheck(t)[1]


# ---- evaluation -------------------------------------------------------------


def _choices(v):
    items = v[1]
    out = []
    for i, a in enumerate(items):
        out.append(("p", a, ("b", items[:i] + items[i + 1 :])))
    out.sort()
    return ("b", tuple(out))


def _add(v):
    items = list(v[2][1])
    insort(items, v[1])
    return ("b", tuple(items))


def _union(v):
    out = [x for inner in v[1] for x in inner[1]]
    out.sort()
    return ("b", tuple(out))


def _dist(v):
    a, s = v[1], v[2]
    return (s[0], ("p", a, s[1]))


_PRIME_FN: dict[str, Callable] = {
    "union": _union,
    "add": _add,
    "choices": _choices,
    "desingleton": lambda v: ("r", v[1][0]) if len(v[1]) == 1 else ("l", UNIT),
    "empty": lambda v: ("b", ()),
    "id": lambda v: v,
    "pi1": lambda v: v[1],
    "pi2": lambda v: v[2],
    "inl": lambda v: ("l", v),
    "inr": lambda v: ("r", v),
    "dist": _dist,
}


@lru_cache(maxsize=4096)
def compile_eval(t: Term) -> Callable:
    """Closure computing the function denoted by a well-typed term."""
    if isinstance(t, Prime):
        return _PRIME_FN[t.name]
    if isinstance(t, Pair):
        f, g = compile_eval(t.left), compile_eval(t.right)
        return lambda v: ("p", f(v), g(v))
    if isinstance(t, Copair):
        f, g = compile_eval(t.left), compile_eval(t.right)
        return lambda v: f(v[1]) if v[0] == "l" else g(v[1])
    if isinstance(t, Map):
        f = compile_eval(t.body)

        def bagmap(v):
            return ("b", tuple(sorted(f(x) for x in v[1])))

        return bagmap
    f, g = compile_eval(t.first), compile_eval(t.then)
    return lambda v: g(f(v))


def eval_term(t: Term, v, check: bool = True):
    dom, _ = typecheck(t)
    if check:
        check_value(dom, v)
    return compile_eval(t)(v)


# ---- text format ------------------------------------------------------------


def parse_term(src) -> Term:
    sx = parse(src) if isinstance(src, str) else src
    if isinstance(sx, str):
        name = ALIASES.get(sx, sx)
        if name == "empty":
            return EMPTY
        raise SexpError(f"unknown term {sx!r}", pos_of(sx))
    if not sx or not isinstance(sx[0], str):
        raise SexpError(f"malformed term {dumps(sx)}", pos_of(sx))
    head = ALIASES.get(str(sx[0]), str(sx[0]))
    args = sx[1:]
    if head in PRIME_ARITY:
        if len(args) != PRIME_ARITY[head]:
            raise SexpError(f"{head} takes {PRIME_ARITY[head]} type arguments, got {len(args)}", pos_of(sx))
        return Prime(head, tuple(parse_type(a) for a in args))
    if head in ("pair", "copair"):
        if len(args) != 2:
            raise SexpError(f"{head} takes 2 arguments, got {len(args)}", pos_of(sx))
        a, b = parse_term(args[0]), parse_term(args[1])
        return Pair(a, b) if head == "pair" else Copair(a, b)
    if head == "map":
        if len(args) != 1:
            raise SexpError(f"map takes 1 argument, got {len(args)}", pos_of(sx))
        return Map(parse_term(args[0]))
    if head == "comp":
        if not args:
            raise SexpError("comp needs at least one argument", pos_of(sx))
        return comp(*(parse_term(a) for a in args))
    if head == "derive":
        from .derived import derive

        if len(args) < 1:
            raise SexpError("derive needs a name", pos_of(sx))
        targs = [int(a) if isinstance(a, str) and a.isdigit() and a != "1" else parse_type(a) for a in args[1:]]
        return derive(str(args[0]), targs)
    raise SexpError(f"unknown head symbol {head!r}", pos_of(sx))


def show_term(t: Term) -> str:
    if isinstance(t, Prime):
        if not t.params:
            return f"({t.name})"
        return f"({t.name} " + " ".join(str(p) for p in t.params) + ")"
    if isinstance(t, Pair):
        return f"(pair {show_term(t.left)} {show_term(t.right)})"
    if isinstance(t, Copair):
        return f"(copair {show_term(t.left)} {show_term(t.right)})"
    if isinstance(t, Map):
        return f"(map {show_term(t.body)})"
    parts = []
    while isinstance(t, Comp):
        parts.append(t.then)
        t = t.first
    parts.append(t)
    return "(comp " + " ".join(show_term(p) for p in reversed(parts)) + ")"


def term_size(t: Term) -> int:
    if isinstance(t, Prime):
        return 1
    if isinstance(t, Map):
        return 1 + term_size(t.body)
    a, b = (t.left, t.right) if isinstance(t, (Pair, Copair)) else (t.first, t.then)
    return 1 + term_size(a) + term_size(b)
