"""Minimal s-expression reader and printer used by every text format."""

from __future__ import annotations


class SexpError(ValueError):
    def __init__(self, msg: str, pos: int | None = None):
        self.pos = pos
        super().__init__(msg if pos is None else f"{msg} (at offset {pos})")


class Atom(str):
    """A symbol carrying its source offset."""

    pos: int = -1

    def __new__(cls, text: str, pos: int = -1):
        obj = super().__new__(cls, text)
        obj.pos = pos
        return obj


class SList(list):
    pos: int = -1


def _tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, i
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            yield text[i:j], i
            i = j


def parse_all(text: str) -> list:
    stack: list[SList] = [SList()]
    for tok, pos in _tokens(text):
        if tok == "(":
            lst = SList()
            lst.pos = pos
            stack.append(lst)
        elif tok == ")":
            if len(stack) == 1:
                raise SexpError("unbalanced ')'", pos)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(Atom(tok, pos))
    if len(stack) != 1:
        raise SexpError("unterminated list", stack[-1].pos)
    return list(stack[0])


def parse(text: str):
    items = parse_all(text)
    if len(items) != 1:
        raise SexpError(f"expected exactly one expression, found {len(items)}")
    return items[0]


def dumps(obj) -> str:
    if isinstance(obj, (list, tuple)):
        return "(" + " ".join(dumps(x) for x in obj) + ")"
    return str(obj)


def pos_of(x) -> int | None:
    p = getattr(x, "pos", -1)
    return None if p is None or p < 0 else p
