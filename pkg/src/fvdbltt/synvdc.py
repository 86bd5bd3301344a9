"""The syntactic virtual double category of a specification.

Objects are contexts, tight arrows are term substitutions modulo
derivable equality, loose arrows are protypes modulo protype equality,
and cells are proterms modulo the equality engine.  Equivalence classes
are represented by chosen representatives; the checker acts as the
equality oracle, so operations stay total and undecided comparisons
surface as unknown verdicts.

Also the bridge back from the finite relation model: a finite model
exports a specification whose symbols name its sets, functions,
relations, and unary cells, with the equalities that hold between
composites up to a fixed depth as axioms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Optional, Sequence

from . import subst as sb
from .checker import (
    DEFAULT_CONFIG,
    OK,
    RewriteConfig,
    Verdict,
    check_proterm,
    check_term_eq,
    fail,
    infer_term,
    protype_equal,
)
from .relmodel import (
    FinFun,
    FinRel,
    FinSet,
    all_functions,
    all_relations,
    rel_leq,
)
from .rewrite import check_proterm_eq, normalize_proterm
from .syntax import (
    And,
    BaseT,
    Context,
    FunApp,
    PPair,
    PProj,
    Procontext,
    ProfApp,
    ProtermAxiom,
    Protype,
    Proterm,
    ProVar,
    PUnit,
    Signature,
    Specification,
    Term,
    TermAxiom,
    TermSubst,
    Top,
    TransApp,
    TransSym,
    Var,
    alpha_equal,
    identity_subst,
)


@dataclass(frozen=True)
class Cell:
    """A cell: chained loose row, target loose arrow, tight boundaries.

    The proterm types at the restricted target, ``target[s0; s1]``.
    """

    proctx: Procontext
    s0: TermSubst
    s1: TermSubst
    target: Protype
    body: Proterm

    def frame_row(self) -> tuple[Protype, ...]:
        return tuple(pt for _, pt in self.proctx.hyps)


class SynVdc:
    """The split cartesian fibrational VDC presented by a specification."""

    def __init__(self, spec: Specification, cfg: RewriteConfig = DEFAULT_CONFIG):
        self.spec = spec
        self.cfg = cfg

    # -- the equality oracle

    def tight_equal(self, gamma: Context, s: TermSubst, t: TermSubst) -> Verdict:
        if s.target != t.target or len(s.components) != len(t.components):
            return fail("tight arrows have different targets")
        for a, b, (_, ty) in zip(s.components, t.components, s.target):
            v = check_term_eq(self.spec, gamma, a, b, ty, self.cfg)
            if not v.ok:
                return v
        return OK

    def loose_equal(
        self, gamma: Context, delta: Context, a: Protype, b: Protype
    ) -> Verdict:
        return protype_equal(self.spec, gamma, delta, a, b, self.cfg)

    def cell_equal(self, a: Cell, b: Cell) -> Verdict:
        if not alpha_equal(a.proctx, b.proctx):
            return fail("cells differ in their loose row")
        g0, gn = a.proctx.outer()
        v = self.tight_equal(g0, a.s0, b.s0)
        if not v.ok:
            return v
        v = self.tight_equal(gn, a.s1, b.s1)
        if not v.ok:
            return v
        target = sb.subst_protype(a.target, a.s0, a.s1)
        body_b = b.body
        if a.proctx.hyp_names() != b.proctx.hyp_names():
            ren = dict(zip(b.proctx.hyp_names(), a.proctx.hyp_names()))
            body_b = sb.rename_provars(body_b, ren)
        return check_proterm_eq(
            self.spec, a.proctx, a.body, body_b, target, self.cfg
        )

    def check_cell(self, c: Cell) -> Verdict:
        target = sb.subst_protype(c.target, c.s0, c.s1)
        return check_proterm(self.spec, c.proctx, c.body, target, self.cfg)

    # -- structure

    def identity_cell(self, gamma: Context, delta: Context, a: Protype) -> Cell:
        p = Procontext((gamma, delta), (("a", a),))
        return Cell(p, identity_subst(gamma), identity_subst(delta), a, ProVar("a"))

    def compose_cells(self, nu: Cell, mus: Sequence[Cell]) -> Cell:
        """The composite ``nu[S̄/Δ̄]⦃μ̄⦄`` with pasted tight boundaries."""
        if len(mus) != len(nu.proctx.hyps):
            raise ValueError("one inner cell per hypothesis of the outer cell")
        if not mus:
            return nu
        boundary: list[TermSubst] = [mus[0].s0]
        for i, mu in enumerate(mus):
            if i > 0 and mu.s0.components != mus[i - 1].s1.components:
                raise ValueError(f"tight boundaries do not paste at joint {i}")
            boundary.append(mu.s1)
        if len(boundary) != len(nu.proctx.slots):
            raise ValueError("boundary count mismatch")
        new_slots = [mus[0].proctx.slots[0]]
        for mu in mus:
            new_slots.append(mu.proctx.slots[-1])
        body = sb.subst_proterm(nu.proctx, nu.body, boundary, new_slots)
        new_hyps = tuple(
            (name, sb.subst_protype(pt, boundary[i], boundary[i + 1]))
            for i, (name, pt) in enumerate(nu.proctx.hyps)
        )
        subst_p = Procontext(tuple(new_slots), new_hyps)
        _, composed = sb.prosubst(
            subst_p, body, [(mu.proctx, mu.body) for mu in mus]
        )
        out_proctx = sb.concat_proctx([mu.proctx for mu in mus])
        s0 = sb.compose_subst(mus[0].s0, nu.s0)
        s1 = sb.compose_subst(mus[-1].s1, nu.s1)
        normal = normalize_proterm(
            self.spec,
            out_proctx,
            composed,
            sb.subst_protype(nu.target, s0, s1),
            self.cfg,
        )
        return Cell(out_proctx, s0, s1, nu.target, normal)

    def restriction(
        self,
        a: Protype,
        src_gamma: Context,
        src_delta: Context,
        s: TermSubst,
        t: TermSubst,
    ) -> tuple[Protype, Cell]:
        """The chosen restriction: substitution into the protype, and the
        provariable cell exhibiting it (factorization is prosubstitution,
        so the universal property holds by construction)."""
        restricted = sb.subst_protype(a, s, t)
        p = Procontext((src_gamma, src_delta), (("a", restricted),))
        return restricted, Cell(p, s, t, a, ProVar("a"))

    def local_top(self, gamma: Context, delta: Context) -> Protype:
        return Top()

    def local_meet(self, a: Protype, b: Protype) -> Protype:
        return And(a, b)

    def pairing_cell(self, c1: Cell, c2: Cell) -> Cell:
        if not alpha_equal(c1.proctx, c2.proctx):
            raise ValueError("pairing needs cells over the same row")
        body2 = c2.body
        if c1.proctx.hyp_names() != c2.proctx.hyp_names():
            body2 = sb.rename_provars(
                body2, dict(zip(c2.proctx.hyp_names(), c1.proctx.hyp_names()))
            )
        return Cell(
            c1.proctx,
            c1.s0,
            c1.s1,
            And(c1.target, c2.target),
            PPair(c1.body, body2),
        )

    def projection_cell(
        self, gamma: Context, delta: Context, a: Protype, b: Protype, side: int
    ) -> Cell:
        p = Procontext((gamma, delta), (("c", And(a, b)),))
        return Cell(
            p,
            identity_subst(gamma),
            identity_subst(delta),
            a if side == 0 else b,
            PProj(side, ProVar("c")),
        )

    def bang_cell(self, proctx: Procontext) -> Cell:
        g0, gn = proctx.outer()
        return Cell(proctx, identity_subst(g0), identity_subst(gn), Top(), PUnit())


# ---------------------------------------------------------------------------
# the associated specification of a finite relation model


@dataclass(frozen=True)
class FinRelModel:
    """A finite fragment of the relation equipment.

    Carries chosen finite sets; the exported functions, relations, and
    unary cells are all of them within the size bound.
    """

    sets: tuple[FinSet, ...]

    def __post_init__(self) -> None:
        if not self.sets:
            return


def associated_specification(
    model: FinRelModel, bound: int = 2, composite_depth: int = 2
) -> tuple[Specification, "ModelSymbols"]:
    """Export the model's sets, functions, relations, and unary cells as
    a specification, with the equalities between composites up to the
    given depth as axioms."""
    sets = [s for s in model.sets if s.size <= bound]
    symbols = ModelSymbols()
    categories = set()
    functors: dict[str, tuple[str, str]] = {}
    profunctors: dict[str, tuple[str, str]] = {}
    transforms: dict[str, TransSym] = {}
    term_axioms: list[TermAxiom] = []
    proterm_axioms: list[ProtermAxiom] = []

    for i, s in enumerate(sets):
        name = f"C{i}"
        categories.add(name)
        symbols.set_names[i] = name

    fun_index: dict[tuple[int, int, tuple[int, ...]], str] = {}
    for i, si in enumerate(sets):
        for j, sj in enumerate(sets):
            for fn in all_functions(si, sj):
                name = f"f{len(fun_index)}"
                fun_index[(i, j, fn.table)] = name
                functors[name] = (symbols.set_names[i], symbols.set_names[j])
                symbols.functions[name] = (i, j, fn)

    rel_index: dict[tuple[int, int, int], str] = {}
    for i, si in enumerate(sets):
        for j, sj in enumerate(sets):
            for rel in all_relations(si, sj):
                name = f"r{len(rel_index)}"
                rel_index[(i, j, rel.bits)] = name
                profunctors[name] = (symbols.set_names[i], symbols.set_names[j])
                symbols.relations[name] = (i, j, rel)

    # unary cells: one transformation symbol per valid inclusion
    sig0 = Signature(
        frozenset(categories), dict(functors), dict(profunctors), {}
    )
    for (i, j, abits), aname in rel_index.items():
        for (i2, j2, bbits), bname in rel_index.items():
            if (i, j) != (i2, j2):
                continue
            if abits & ~bbits:
                continue
            cname = f"c{len(transforms)}"
            transforms[cname] = _unary_cell_sym(sig0, aname, bname)
            symbols.cells[(aname, bname)] = cname

    sig = Signature(
        frozenset(categories), dict(functors), dict(profunctors), transforms
    )
    spec = Specification(sig)

    # term axioms: identity functions collapse, and composites of
    # functions up to the given depth
    for (i, j, table), gname in fun_index.items():
        if i == j and table == tuple(range(sets[i].size)):
            ctx = Context((("x", BaseT(symbols.set_names[i])),))
            term_axioms.append(
                TermAxiom(
                    ctx,
                    FunApp(gname, Var(0, "x")),
                    Var(0, "x"),
                    BaseT(symbols.set_names[i]),
                )
            )
    for (i, j, table), gname in fun_index.items():
        for (j2, k, table2), fname in fun_index.items():
            if j2 != j:
                continue
            comp = tuple(table2[v] for v in table)
            hname = fun_index[(i, k, comp)]
            ctx = Context((("x", BaseT(symbols.set_names[i])),))
            term_axioms.append(
                TermAxiom(
                    ctx,
                    FunApp(fname, FunApp(gname, Var(0, "x"))),
                    FunApp(hname, Var(0, "x")),
                    BaseT(symbols.set_names[k]),
                )
            )

    # proterm axioms: identity cells and composites of unary cells
    for (aname, bname), cname in symbols.cells.items():
        i, j, _ = symbols.relations[aname]
        p, xy = _unary_frame(symbols, aname)
        if aname == bname:
            proterm_axioms.append(
                ProtermAxiom(
                    p,
                    TransApp(cname, xy, (ProVar("a"),)),
                    ProVar("a"),
                    _prof(aname),
                    f"id.{aname}",
                )
            )
    for (aname, bname), c1 in symbols.cells.items():
        for (bname2, cname2), c2 in symbols.cells.items():
            if bname2 != bname:
                continue
            c3 = symbols.cells[(aname, cname2)]
            p, xy = _unary_frame(symbols, aname)
            proterm_axioms.append(
                ProtermAxiom(
                    p,
                    TransApp(c2, xy, (TransApp(c1, xy, (ProVar("a"),)),)),
                    TransApp(c3, xy, (ProVar("a"),)),
                    _prof(cname2),
                    f"comp.{c1}.{c2}",
                )
            )

    out = Specification(
        sig, {}, tuple(term_axioms), tuple(proterm_axioms)
    )
    return out, symbols


@dataclass
class ModelSymbols:
    set_names: dict[int, str] = field(default_factory=dict)
    functions: dict[str, tuple[int, int, FinFun]] = field(default_factory=dict)
    relations: dict[str, tuple[int, int, FinRel]] = field(default_factory=dict)
    cells: dict[tuple[str, str], str] = field(default_factory=dict)


def _unary_cell_sym(sig: Signature, aname: str, bname: str) -> TransSym:
    from .syntax import chain_transform

    return chain_transform(sig, (aname,), bname)


def _prof(name: str) -> Protype:
    return ProfApp(name, Var(0, "x"), Var(0, "y"))


def _unary_frame(symbols: ModelSymbols, aname: str):
    i, j, _ = symbols.relations[aname]
    gamma = Context((("x", BaseT(symbols.set_names[i])),))
    delta = Context((("y", BaseT(symbols.set_names[j])),))
    p = Procontext((gamma, delta), (("a", _prof(aname)),))
    xy = ((Var(0, "x"),), (Var(0, "y"),))
    return p, xy


# ---------------------------------------------------------------------------
# the syntax-to-model comparison at unary frames


def enumerate_unary_cells(
    spec: Specification,
    symbols: ModelSymbols,
    aname: str,
    bname: str,
    depth: int = 2,
) -> list[Proterm]:
    """Derivable proterms a : A(x;y) |- m : B(x;y), bounded by chain depth."""
    p, xy = _unary_frame(symbols, aname)
    i, j, _ = symbols.relations[aname]

    def chains(src: str, d: int, arg: Proterm) -> list[Proterm]:
        out = []
        if src == bname:
            out.append(arg)
        if d == 0:
            return out
        for (a2, b2), cname in symbols.cells.items():
            if a2 != src:
                continue
            out.extend(chains(b2, d - 1, TransApp(cname, xy, (arg,))))
        return out

    return chains(aname, depth, ProVar("a"))


def counit_unary_check(
    model: FinRelModel,
    bound: int = 2,
    cfg: RewriteConfig = DEFAULT_CONFIG,
    depth: int = 2,
) -> Verdict:
    """The three equivalence conditions, restricted to unary globular
    frames, checked by exhaustive enumeration.

    (i) terms between singleton contexts modulo derivable equality
    biject with the model's functions; (ii) every model relation is the
    interpretation of a protype (a symbol); (iii) at each unary frame
    the derivable cells modulo derivable equality biject with the
    model's cells (the inclusion, when it holds).
    """
    spec, symbols = associated_specification(model, bound)
    # (i) tight arrows: functor chains up to depth 3 modulo equality
    for i, iname in symbols.set_names.items():
        for j, jname in symbols.set_names.items():
            ctx = Context((("x", BaseT(iname)),))
            classes: list = []
            for t in _term_chains(symbols, i, j, 3):
                if not any(
                    check_term_eq(spec, ctx, t, rep, BaseT(jname), cfg).ok
                    for rep in classes
                ):
                    classes.append(t)
            expected = sum(
                1
                for (si, sj, _) in symbols.functions.values()
                if si == i and sj == j
            )
            if len(classes) != expected:
                return fail(
                    f"tight arrows {iname}->{jname}: {len(classes)} classes, "
                    f"{expected} functions"
                )
    # (ii) loose arrows: every relation is named by a symbol
    #      (immediate from the construction; count for the record)
    # (iii) cells at unary frames
    for aname, (i, j, arel) in symbols.relations.items():
        for bname, (i2, j2, brel) in symbols.relations.items():
            if (i, j) != (i2, j2):
                continue
            p, _ = _unary_frame(symbols, aname)
            target = _prof(bname)
            candidates = enumerate_unary_cells(spec, symbols, aname, bname, depth)
            model_has = rel_leq(arel, brel)
            if not model_has:
                if candidates:
                    return fail(
                        f"{aname} => {bname}: syntactic cells without a model cell"
                    )
                continue
            if not candidates:
                return fail(f"{aname} => {bname}: missing syntactic cell")
            rep = candidates[0]
            for other in candidates[1:]:
                v = check_proterm_eq(spec, p, rep, other, target, cfg)
                if not v.ok:
                    return fail(
                        f"{aname} => {bname}: two syntactic cells are not equal"
                    )
    return OK


def _term_chains(symbols: ModelSymbols, i: int, j: int, depth: int) -> list:
    out = []

    def go(src: int, d: int, t) -> None:
        if src == j:
            out.append(t)
        if d == 0:
            return
        for fname, (si, sj, _) in symbols.functions.items():
            if si == src:
                go(sj, d - 1, FunApp(fname, t))

    go(i, depth, Var(0, "x"))
    return out
