"""Tree-depth encodings and equivalence of graph interpretations.

Prints the encoding of a few small graphs, checks that decoding returns
the graph, and compares the identity interpretation with the edge
complement on graphs of tree-depth at most 2.
"""

from polyreg.core import show_value
from polyreg.treedepth import (
    Graph,
    edge_complement,
    graph_interp,
    graph_iso,
    show_graph,
    td_decode_encoding,
    td_encode,
    td_equiv,
    tree_depth,
)

GRAPHS = {
    "single vertex": Graph.of(1),
    "edge": Graph.of(2, [(0, 1)]),
    "star": Graph.of(4, [(0, 1), (0, 2), (0, 3)]),
    "path of 4": Graph.of(4, [(0, 1), (1, 2), (2, 3)]),
}


def main():
    for name, g in GRAPHS.items():
        k = tree_depth(g)
        v = td_encode(g, k)
        assert graph_iso(td_decode_encoding(v, k), g)
        print(f"{name}: tree-depth {k}")
        print("  " + show_value(v))
    verdict = td_equiv(graph_interp(), edge_complement(), 2, 2)
    print("identity vs complement:", type(verdict).__name__)
    print(show_graph(verdict.graph), end="")


if __name__ == "__main__":
    main()
