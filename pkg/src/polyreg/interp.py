"""First-order interpretations: application, composition and compilation of terms.

An interpretation has components, each with a tuple of variables (its
dimension) and a universe formula. Output relations are given per tuple of
components; a missing entry means the relation never holds there.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable

from .calculus import Comp, Copair, Map, Pair, Prime, Term, typecheck
from .core import MsType
from .logic import (
    FALSE_F,
    TRUE_F,
    And,
    Const,
    Eq,
    Exists,
    Formula,
    Not,
    Or,
    Rel,
    Structure,
    Vocabulary,
    compile_formula,
    conj,
    disj,
    eq,
    exists,
    forall,
    implies,
    is_qf,
    neg,
    parse_formula,
    path_name,
    quantifier_rank,
    rel,
    rename,
    root_formula,
    show_formula,
    split_name,
    voc_of,
)
from .sexp import SexpError, dumps, parse, pos_of


class InterpError(ValueError):
    pass


_fresh = itertools.count()


def fresh(prefix: str = "x") -> str:
    return f"{prefix}_{next(_fresh)}"


def fresh_block(n: int, prefix: str = "x") -> tuple:
    return tuple(fresh(prefix) for _ in range(n))


@dataclass(frozen=True)
class Component:
    name: Hashable
    vars: tuple
    universe: Formula

    @property
    def dim(self) -> int:
        return len(self.vars)


@dataclass
class Interpretation:
    in_vocab: Vocabulary
    out_vocab: Vocabulary
    components: list
    rels: dict = field(default_factory=dict)  # (name, comp names) -> (vars, formula)

    def comp(self, name) -> Component:
        return self._index()[name]

    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None or len(idx) != len(self.components):
            idx = {c.name: c for c in self.components}
            self.__dict__["_idx"] = idx
        return idx

    def formulas(self):
        for c in self.components:
            yield c.universe
        for _, f in self.rels.values():
            yield f

    @property
    def quantifier_free(self) -> bool:
        return all(is_qf(f) for f in self.formulas())

    @property
    def rank(self) -> int:
        return max((quantifier_rank(f) for f in self.formulas()), default=0)

    @property
    def max_dim(self) -> int:
        return max((c.dim for c in self.components), default=0)

    def set_rel(self, name, comps, vars_, formula):
        if isinstance(formula, Const) and not formula.value:
            self.rels.pop((name, tuple(comps)), None)
            return
        self.rels[(name, tuple(comps))] = (tuple(vars_), formula)

    def pruned(self) -> "Interpretation":
        comps = [c for c in self.components if c.universe != FALSE_F]
        alive = {c.name for c in comps}
        rels = {k: v for k, v in self.rels.items() if all(c in alive for c in k[1])}
        return Interpretation(self.in_vocab, self.out_vocab, comps, rels)


# ---------------------------------------------------------------- application


def apply_interp(f: Interpretation, A: Structure, allow_empty: bool = False) -> Structure:
    elems: dict = {}
    for c in f.components:
        test = compile_formula(c.universe)
        env: dict = {}
        found = []
        for tup in itertools.product(A.universe, repeat=c.dim):
            env.update(zip(c.vars, tup))
            if test(A, env):
                found.append((c.name, tup))
        elems[c.name] = found
    universe = tuple(e for c in f.components for e in elems[c.name])
    if not universe and not allow_empty:
        raise InterpError("output universe is empty")
    rels = {n: set() for n in f.out_vocab.names()}
    for (name, comps), (vars_, formula) in f.rels.items():
        if name not in rels:
            raise InterpError(f"relation {name} not in output vocabulary")
        test = compile_formula(formula)
        env = {}
        for combo in itertools.product(*(elems[c] for c in comps)):
            flat = tuple(x for _, tup in combo for x in tup)
            env.update(zip(vars_, flat))
            if test(A, env):
                rels[name].add(combo)
    return Structure(universe, rels, f.out_vocab)


# ---------------------------------------------------------------- composition


def _translate(psi: Formula, env: dict, f: Interpretation) -> Formula:
    """Rewrite a formula over f's output vocabulary into one over f's input.
    env maps each free variable to (f-component name, block of variables)."""
    if isinstance(psi, Const):
        return psi
    if isinstance(psi, Eq):
        (ca, ba), (cb, bb) = env[psi.left.name], env[psi.right.name]
        if ca != cb:
            return FALSE_F
        return conj(*(eq(x, y) for x, y in zip(ba, bb)))
    if isinstance(psi, Rel):
        blocks = [env[a.name] for a in psi.args]
        key = (psi.name, tuple(c for c, _ in blocks))
        entry = f.rels.get(key)
        if entry is None:
            return FALSE_F
        vars_, phi = entry
        flat = [x for _, b in blocks for x in b]
        return rename(phi, dict(zip(vars_, flat)))
    if isinstance(psi, Not):
        return neg(_translate(psi.body, env, f))
    if isinstance(psi, And):
        return conj(*(_translate(p, env, f) for p in psi.parts))
    if isinstance(psi, Or):
        return disj(*(_translate(p, env, f) for p in psi.parts))
    parts = []
    is_ex = isinstance(psi, Exists)
    for c in f.components:
        block = fresh_block(c.dim, "q")
        guard = rename(c.universe, dict(zip(c.vars, block)))
        inner = dict(env)
        inner[psi.var] = (c.name, block)
        body = _translate(psi.body, inner, f)
        part = conj(guard, body) if is_ex else implies(guard, body)
        for v in reversed(block):
            part = exists(v, part) if is_ex else forall(v, part)
        parts.append(part)
    return disj(*parts) if is_ex else conj(*parts)


def compose_interp(f: Interpretation, g: Interpretation) -> Interpretation:
    """Run f, then g."""
    if set(f.out_vocab.names()) != set(g.in_vocab.names()):
        raise InterpError("vocabulary mismatch in composition")
    comps = []
    blocks_of: dict = {}
    for gc in g.components:
        for choice in itertools.product(f.components, repeat=gc.dim):
            blocks = [fresh_block(c.dim) for c in choice]
            env = {v: (c.name, b) for v, c, b in zip(gc.vars, choice, blocks)}
            guards = [rename(c.universe, dict(zip(c.vars, b))) for c, b in zip(choice, blocks)]
            uni = conj(*guards, _translate(gc.universe, env, f))
            if uni == FALSE_F:
                continue
            name = (gc.name, tuple(c.name for c in choice))
            flat = tuple(x for b in blocks for x in b)
            comps.append(Component(name, flat, uni))
            blocks_of[name] = (gc, env)
    out = Interpretation(f.in_vocab, g.out_vocab, comps, {})
    by_g: dict = {}
    for c in comps:
        by_g.setdefault(c.name[0], []).append(c)
    for (rname, gcomps), (gvars, psi) in g.rels.items():
        pools = [by_g.get(gc, []) for gc in gcomps]
        for combo in itertools.product(*pools):
            new_vars = []
            env = {}
            offset = 0
            for slot, c in zip(gcomps, combo):
                gc, cenv = blocks_of[c.name]
                block = fresh_block(c.dim)
                rn = dict(zip(c.vars, block))
                for gv_i, gv in enumerate(gc.vars):
                    fc, b = cenv[gv]
                    env[gvars[offset + gv_i]] = (fc, tuple(rn[x] for x in b))
                offset += gc.dim
                new_vars.extend(block)
            phi = _translate(psi, env, f)
            out.set_rel(rname, [c.name for c in combo], new_vars, phi)
    return out


# -------------------------------------------------------------- constructions


def identity_interp(voc: Vocabulary) -> Interpretation:
    x = fresh()
    c = Component("id", (x,), TRUE_F)
    out = Interpretation(voc, voc, [c], {})
    for name, ar in voc.rels:
        block = fresh_block(ar)
        out.set_rel(name, ["id"] * ar, block, rel(name, *block))
    return out


def _names(ty: MsType):
    """(kind, path, arity) of every relation of voc(ty), paths relative to ty."""
    out = []
    for name, ar in voc_of(ty).rels:
        kind, path = split_name(name)
        out.append((kind, path, ar))
    return out


def _at(kind: str, prefix: str, q: str) -> str:
    return path_name(kind, prefix + q)


def _arity_at(kind: str, path: str, base: int) -> int:
    if kind == "tag":
        return 1 if "m" in path else 0
    return base


def _single(in_ty: MsType, out_ty: MsType, universe_of, rel_defs) -> Interpretation:
    """One dimension-one component; rel_defs yields (name, formula over vars)."""
    x = fresh()
    f = Interpretation(voc_of(in_ty), voc_of(out_ty), [Component("c", (x,), universe_of(x))], {})
    arities = voc_of(out_ty).arity
    for name, builder in rel_defs:
        ar = arities[name]
        block = fresh_block(ar)
        f.set_rel(name, ["c"] * ar, block, builder(*block))
    return f


def _copy(in_kind_path: str, out_path_name: str, in_ar: int, out_ar: int, guard=None):
    """Builder copying an input relation, lowering nothing, lifting 0-ary to unary."""

    def build(*vs):
        if in_ar == 0:
            body = Rel(in_kind_path, ())
        else:
            body = rel(in_kind_path, *vs)
        if guard is not None and vs:
            return conj(guard(*vs), body)
        return body

    return build


def _renamed(ty: MsType, in_prefix: str, out_prefix: str, guard=None):
    """Relation definitions copying ty's relations from in_prefix to out_prefix."""
    defs = []
    for kind, q, base in _names(ty):
        in_ar = _arity_at(kind, in_prefix + q, base)
        out_ar = _arity_at(kind, out_prefix + q, base)
        if out_ar < in_ar:
            raise InterpError("cannot lower a relation by renaming")
        defs.append((_at(kind, out_prefix, q), _copy(_at(kind, in_prefix, q), "", in_ar, out_ar, guard)))
    return defs


def _prime(p: Prime) -> Interpretation:
    n, ps = p.name, p.params
    dom, cod = typecheck(p)
    if n == "id":
        return identity_interp(voc_of(dom))
    if n == "pi1" or n == "pi2":
        side = "1" if n == "pi1" else "2"
        pr = path_name("prod", "")
        uni = (lambda x: rel(pr, x)) if side == "1" else (lambda x: neg(rel(pr, x)))
        return _single(dom, cod, uni, _renamed(cod, side, ""))
    if n == "inl" or n == "inr":
        side = "l" if n == "inl" else "r"
        src = ps[0] if side == "l" else ps[1]
        defs = _renamed(src, "", side)
        tag = path_name("tag", "")
        f = _single(dom, cod, lambda x: TRUE_F, defs)
        f.set_rel(tag, [], [], TRUE_F if side == "r" else FALSE_F)
        return f
    if n == "empty":
        return Interpretation(voc_of(dom), voc_of(cod), [Component("root", (), TRUE_F)], {})
    if n == "union":
        s = ps[0]
        sim0, sim1 = path_name("sim", ""), path_name("sim", "m")
        defs = [(sim0, lambda x, y: rel(sim1, x, y))] + _renamed(s, "mm", "m")
        return _single(dom, cod, lambda x: disj(neg(rel(sim0, x, x)), rel(sim1, x, x)), defs)
    if n == "add":
        s = ps[0]
        pr, sim0, sim2 = path_name("prod", ""), path_name("sim", ""), path_name("sim", "2")
        defs = [(sim0, lambda x, y: disj(conj(rel(pr, x), rel(pr, y)), rel(sim2, x, y)))]
        for kind, q, base in _names(s):
            left_ar = _arity_at(kind, "1" + q, base)
            out = _at(kind, "m", q)
            left, right = _at(kind, "1", q), _at(kind, "2m", q)
            if left_ar == 0:
                defs.append((out, lambda x, left=left, right=right: disj(conj(rel(pr, x), Rel(left, ())), rel(right, x))))
            else:
                defs.append((out, lambda *vs, left=left, right=right: disj(rel(left, *vs), rel(right, *vs))))
        return _single(dom, cod, lambda x: TRUE_F, defs)
    if n == "dist":
        s, a, b = ps
        tag2, pr = path_name("tag", "2"), path_name("prod", "")
        t2 = Rel(tag2, ())
        defs = [
            (path_name("prod", "l"), lambda x: conj(neg(t2), rel(pr, x))),
            (path_name("prod", "r"), lambda x: conj(t2, rel(pr, x))),
        ]
        for kind, q, base in _names(s):
            src = _at(kind, "1", q)
            ar = _arity_at(kind, "1" + q, base)
            for side, g in (("l", neg(t2)), ("r", t2)):
                if ar == 0:
                    defs.append((_at(kind, side + "1", q), lambda g=g, src=src: conj(g, Rel(src, ()))))
                else:
                    defs.append((_at(kind, side + "1", q), lambda *vs, g=g, src=src: conj(g, rel(src, *vs))))
        defs += _renamed(a, "2l", "l2") + _renamed(b, "2r", "r2")
        f = _single(dom, cod, lambda x: TRUE_F, defs)
        f.set_rel(path_name("tag", ""), [], [], t2)
        return f
    if n == "desingleton":
        s = ps[0]
        sim0 = path_name("sim", "")
        u, v, w = fresh("s"), fresh("s"), fresh("s")
        not_single = disj(
            forall(u, neg(rel(sim0, u, u))),
            exists(v, exists(w, conj(rel(sim0, v, v), rel(sim0, w, w), neg(rel(sim0, v, w))))),
        )
        x = fresh()
        comps = [Component("err", (), not_single), Component("elem", (x,), conj(neg(not_single), rel(sim0, x, x)))]
        f = Interpretation(voc_of(dom), voc_of(cod), comps, {})
        f.set_rel(path_name("tag", ""), [], [], neg(not_single))
        for kind, q, base in _names(s):
            src = _at(kind, "m", q)
            out = _at(kind, "r", q)
            out_ar = _arity_at(kind, "r" + q, base)
            if out_ar == 0:
                z = fresh("s")
                f.set_rel(out, [], [], exists(z, conj(rel(sim0, z, z), rel(src, z))))
            else:
                block = fresh_block(out_ar)
                f.set_rel(out, ["elem"] * out_ar, block, rel(src, *block))
        return f
    if n == "choices":
        return _choices_interp(ps[0], dom, cod)
    raise InterpError(f"no interpretation for prime {n}")


def _choices_interp(s: MsType, dom: MsType, cod: MsType) -> Interpretation:
    sim0 = path_name("sim", "")
    r, a, p, b = fresh("r"), fresh("a"), fresh("p"), fresh("b")
    comps = [
        Component("root", (r,), neg(rel(sim0, r, r))),
        Component("left", (a,), rel(sim0, a, a)),
        Component("right", (p, b), conj(rel(sim0, p, p), root_formula(s, p, "m"), neg(rel(sim0, p, b)))),
    ]
    f = Interpretation(voc_of(dom), voc_of(cod), comps, {})
    out_sim = path_name("sim", "")
    x, y, x1, x2, y1, y2 = (fresh() for _ in range(6))
    f.set_rel(out_sim, ["left", "left"], [x, y], rel(sim0, x, y))
    f.set_rel(out_sim, ["left", "right"], [x, y1, y2], rel(sim0, x, y1))
    f.set_rel(out_sim, ["right", "left"], [x1, x2, y], rel(sim0, x1, y))
    f.set_rel(out_sim, ["right", "right"], [x1, x2, y1, y2], eq(x1, y1))
    f.set_rel(path_name("prod", "m"), ["left"], [x], TRUE_F)
    f.set_rel(path_name("sim", "m2"), ["right", "right"], [x1, x2, y1, y2], conj(eq(x1, y1), rel(sim0, x2, y2)))
    for kind, q, base in _names(s):
        src = _at(kind, "m", q)
        ar = _arity_at(kind, "m" + q, base)
        block = fresh_block(ar)
        f.set_rel(_at(kind, "m1", q), ["left"] * ar, block, rel(src, *block))
        pairs = [(fresh(), fresh()) for _ in range(ar)]
        flat = [v for pr in pairs for v in pr]
        same = conj(*(eq(pairs[0][0], pr[0]) for pr in pairs[1:]))
        f.set_rel(_at(kind, "m2m", q), ["right"] * ar, flat, conj(same, rel(src, *(pr[1] for pr in pairs))))
    return f


def _prefix_out(f: Interpretation, tag: str, prefix: str, out_voc: Vocabulary) -> Interpretation:
    comps = [Component((tag, c.name), c.vars, c.universe) for c in f.components]
    out = Interpretation(f.in_vocab, out_voc, comps, {})
    for (name, cs), (vs, phi) in f.rels.items():
        kind, q = split_name(name)
        out.set_rel(_at(kind, prefix, q), [(tag, c) for c in cs], vs, phi)
    return out


def _pair(f: Interpretation, g: Interpretation, cod: MsType) -> Interpretation:
    voc = voc_of(cod)
    lf = _prefix_out(f, "1", "1", voc)
    rg = _prefix_out(g, "2", "2", voc)
    out = Interpretation(f.in_vocab, voc, lf.components + rg.components, {**lf.rels, **rg.rels})
    pr = path_name("prod", "")
    for c in lf.components:
        out.set_rel(pr, [c.name], c.vars, TRUE_F)
    return out


def _rename_input(phi: Formula, prefix: str) -> Formula:
    def fix(atom):
        if isinstance(atom, Rel):
            kind, q = split_name(atom.name)
            return Rel(_at(kind, prefix, q), atom.args)
        return atom

    from .logic import map_atoms

    return map_atoms(phi, fix)


def _copair(f: Interpretation, g: Interpretation, dom: MsType, cod: MsType) -> Interpretation:
    tag = Rel(path_name("tag", ""), ())
    comps = []
    rels: dict = {}
    out = Interpretation(voc_of(dom), voc_of(cod), comps, rels)
    nullary: dict = {}
    for side, h, guard in (("l", f, neg(tag)), ("r", g, tag)):
        for c in h.components:
            comps.append(Component((side, c.name), c.vars, conj(guard, _rename_input(c.universe, side))))
        for (name, cs), (vs, phi) in h.rels.items():
            phi = _rename_input(phi, side)
            if not cs:
                nullary.setdefault(name, []).append(conj(guard, phi))
            else:
                out.set_rel(name, [(side, c) for c in cs], vs, phi)
    for name, parts in nullary.items():
        out.set_rel(name, [], [], disj(*parts))
    return out


def _relativize(phi: Formula, anchor: str) -> Formula:
    """Move a formula about one item's structure into the enclosing bag."""
    sim0 = path_name("sim", "")
    if isinstance(phi, Const):
        return phi
    if isinstance(phi, Eq):
        return phi
    if isinstance(phi, Rel):
        kind, q = split_name(phi.name)
        name = _at(kind, "m", q)
        if kind == "tag" and not phi.args:
            return rel(name, anchor)
        return Rel(name, phi.args)
    if isinstance(phi, Not):
        return neg(_relativize(phi.body, anchor))
    if isinstance(phi, And):
        return conj(*(_relativize(p, anchor) for p in phi.parts))
    if isinstance(phi, Or):
        return disj(*(_relativize(p, anchor) for p in phi.parts))
    body = _relativize(phi.body, anchor)
    guard = rel(sim0, phi.var, anchor)
    if isinstance(phi, Exists):
        return exists(phi.var, conj(guard, body))
    return forall(phi.var, implies(guard, body))


def _map(f: Interpretation, dom: MsType, cod: MsType) -> Interpretation:
    s = dom.elem
    sim0 = path_name("sim", "")
    r = fresh("r")
    comps = [Component("root", (r,), neg(rel(sim0, r, r)))]
    anchors = {}
    for c in f.components:
        if c.dim == 0:
            a = fresh("a")
            uni = conj(rel(sim0, a, a), root_formula(s, a, "m"), _relativize(c.universe, a))
            comps.append(Component(("m", c.name), (a,), uni))
            anchors[c.name] = (a,)
        else:
            a = c.vars[0]
            same = conj(*(rel(sim0, a, v) for v in c.vars))
            comps.append(Component(("m", c.name), c.vars, conj(same, _relativize(c.universe, a))))
            anchors[c.name] = c.vars
    out = Interpretation(voc_of(dom), voc_of(cod), comps, {})
    inner = [c for c in f.components]
    for c1 in inner:
        for c2 in inner:
            b1, b2 = fresh_block(len(anchors[c1.name])), fresh_block(len(anchors[c2.name]))
            out.set_rel(sim0, [("m", c1.name), ("m", c2.name)], b1 + b2, rel(sim0, b1[0], b2[0]))
    for (name, cs), (vs, phi) in f.rels.items():
        kind, q = split_name(name)
        new_name = _at(kind, "m", q)
        if not cs:
            for c in inner:
                block = fresh_block(len(anchors[c.name]))
                out.set_rel(new_name, [("m", c.name)], block, _relativize(phi, block[0]))
            continue
        blocks = [fresh_block(len(anchors[c])) for c in cs]
        mapping = {}
        pos = 0
        for c, block in zip(cs, blocks):
            dim = f.comp(c).dim
            mapping.update(zip(vs[pos : pos + dim], block[:dim] if dim else ()))
            pos += dim
        anchor = blocks[0][0]
        same = conj(*(rel(sim0, anchor, b[0]) for b in blocks[1:]))
        body = _relativize(rename(phi, mapping), anchor)
        out.set_rel(new_name, [("m", c) for c in cs], [v for b in blocks for v in b], conj(same, body))
    return out


def compile_term(t: Term) -> Interpretation:
    """Interpretation computing the same function as t on relational encodings."""
    dom, cod = typecheck(t)
    if isinstance(t, Prime):
        return _prime(t)
    if isinstance(t, Pair):
        return _pair(compile_term(t.left), compile_term(t.right), cod)
    if isinstance(t, Copair):
        return _copair(compile_term(t.left), compile_term(t.right), dom, cod)
    if isinstance(t, Map):
        return _map(compile_term(t.body), dom, cod)
    if isinstance(t, Comp):
        return compose_interp(compile_term(t.first), compile_term(t.then)).pruned()
    raise InterpError(f"not a term: {t!r}")


def apply_to_value(f: Interpretation, dom: MsType, cod: MsType, v):
    from .logic import struct_of_value, value_of_struct

    return value_of_struct(cod, apply_interp(f, struct_of_value(dom, v)))


# ------------------------------------------------------------ text format


def show_interp(f: Interpretation) -> str:
    names = {c.name: f"c{i}" for i, c in enumerate(f.components)}
    lines = ["(interpretation"]
    lines.append(
        "  (input "
        + " ".join(f"(rel {n} {a})" for n, a in f.in_vocab.rels)
        + "".join(f" (func {fn})" for fn in f.in_vocab.funcs)
        + ")"
    )
    lines.append("  (output " + " ".join(f"(rel {n} {a})" for n, a in f.out_vocab.rels) + ")")
    for c in f.components:
        lines.append(
            f"  (component {names[c.name]} :dim {c.dim} :vars ({' '.join(c.vars)}) :universe {show_formula(c.universe)})"
        )
    for (name, cs), (vs, phi) in sorted(f.rels.items(), key=lambda kv: (kv[0][0], [names[c] for c in kv[0][1]])):
        lines.append(
            f"  (relation {name} ({' '.join(names[c] for c in cs)}) :vars ({' '.join(vs)}) {show_formula(phi)})"
        )
    return "\n".join(lines) + ")"


def _kw(items, key, default=None):
    for i, it in enumerate(items):
        if it == key and i + 1 < len(items):
            return items[i + 1]
    return default


def parse_interp(src) -> Interpretation:
    sx = parse(src) if isinstance(src, str) else src
    if not isinstance(sx, list) or not sx or sx[0] != "interpretation":
        raise SexpError("expected (interpretation ...)", pos_of(sx))
    in_voc = out_voc = None
    comps = []
    pending = []
    for block in sx[1:]:
        if not isinstance(block, list) or not block:
            raise SexpError(f"malformed block {dumps(block)}", pos_of(block))
        head = block[0]
        if head in ("input", "output"):
            voc = _parse_voc(block[1:])
            if head == "input":
                in_voc = voc
            else:
                out_voc = voc
        elif head in ("input-type", "output-type"):
            from .core import parse_type

            voc = voc_of(parse_type(block[1]))
            if head == "input-type":
                in_voc = voc
            else:
                out_voc = voc
        elif head == "input-tree":
            from .logic import edge_vocabulary

            in_voc = edge_vocabulary([str(c) for c in block[1:]])
        elif head == "component":
            name = str(block[1])
            rest = block[2:]
            vs = _kw(rest, ":vars")
            dim = int(_kw(rest, ":dim", len(vs) if vs is not None else 0))
            if vs is None:
                vs = [f"{name}_{i}" for i in range(dim)]
            if len(vs) != dim:
                raise SexpError(f"component {name}: :dim {dim} but {len(vs)} vars", pos_of(block))
            uni = parse_formula(_kw(rest, ":universe", "true"))
            comps.append(Component(name, tuple(str(v) for v in vs), uni))
        elif head == "relation":
            pending.append(block)
        else:
            raise SexpError(f"unknown block {head!r}", pos_of(block))
    if in_voc is None or out_voc is None:
        raise SexpError("interpretation needs input and output vocabularies")
    f = Interpretation(in_voc, out_voc, comps, {})
    by_name = {c.name: c for c in comps}
    for block in pending:
        name = str(block[1])
        cs = [str(c) for c in block[2]]
        for c in cs:
            if c not in by_name:
                raise SexpError(f"unknown component {c}", pos_of(block))
        rest = block[3:]
        vs = _kw(rest, ":vars")
        body = rest[-1]
        if vs is None:
            vs = [f"{v}" for c in cs for v in by_name[c].vars]
        f.set_rel(name, cs, tuple(str(v) for v in vs), parse_formula(body))
    return f


def _parse_voc(items) -> Vocabulary:
    rels = {}
    funcs = []
    for it in items:
        if it[0] == "rel":
            rels[str(it[1])] = int(it[2])
        elif it[0] == "func":
            funcs.append(str(it[1]))
        else:
            raise SexpError(f"malformed vocabulary entry {dumps(it)}", pos_of(it))
    return Vocabulary.of(rels, funcs)
