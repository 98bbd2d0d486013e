"""Polyregular functions on multiset types.

Modules: core (types, values, trees), calculus (terms and evaluator),
logic (structures and first-order formulas), interp (interpretations and the
term compiler), derived (derived terms and encodings), patterns and symbolic
(equivalence of quantifier-free tree transductions), qelim (quantifier
elimination and the general equivalence check), treedepth (graph encodings)
and cli.
"""

__version__ = "0.1.0"
