"""Small builders shared by several test modules."""

from polyreg.interp import Component, Interpretation, fresh_block
from polyreg.logic import TRUE_F
from polyreg.treedepth import graph_vocab


def vertex_interp(dim, universe, edge=None, apex=False, apex_edges=True):
    """Graph-to-graph interpretation with one component of dimension dim
    (universe(*vars)), edges edge(xs, ys) between its tuples, and an optional
    dimension-zero apex joined to every other vertex."""
    xs = fresh_block(dim)
    comps = [Component("v", xs, universe(*xs))]
    if apex:
        comps.append(Component("apex", (), TRUE_F))
    f = Interpretation(graph_vocab(1), graph_vocab(1), comps, {})
    if edge is not None:
        ab = fresh_block(2 * dim)
        f.set_rel("E", ["v", "v"], ab, edge(ab[:dim], ab[dim:]))
    if apex and apex_edges:
        f.set_rel("E", ["v", "apex"], fresh_block(dim), TRUE_F)
        f.set_rel("E", ["apex", "v"], fresh_block(dim), TRUE_F)
    return f
