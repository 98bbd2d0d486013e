"""Decide equivalence for a few hand-picked pairs of multiset functions."""

import time

from polyreg.calculus import Map, comp, ident, union
from polyreg.core import ONE, parse_type, show_value
from polyreg.derived import const_from, swap
from polyreg.qelim import ValueCounterexample, equiv

M1 = parse_type("(M 1)")
MM1 = parse_type("(M (M 1))")
P = parse_type("(* (M 1) (M 1))")

PAIRS = [
    ("identity vs map of identity", ident(M1), Map(ident(ONE)), M1, M1),
    ("union vs constant", union(ONE), const_from(MM1, M1), MM1, M1),
    ("flattening order", comp(Map(union(ONE)), union(ONE)), comp(union(M1), union(ONE)), parse_type("(M (M (M 1)))"), M1),
    ("swap twice vs identity", comp(swap(M1, M1), swap(M1, M1)), ident(P), P, P),
]


def main():
    for name, f, g, dom, cod in PAIRS:
        t0 = time.time()
        v = equiv(f, g, dom, cod)
        dt = time.time() - t0
        if isinstance(v, ValueCounterexample):
            print(f"{name}: differ on {show_value(v.value)} ({dt:.1f}s)")
        else:
            print(f"{name}: equivalent ({dt:.1f}s)")


if __name__ == "__main__":
    main()
