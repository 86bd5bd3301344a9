"""Random well-typed syntax for property tests and law sweeps.

Generation is constructive: each case builds the judgment together with
the object, so everything produced checks.  The fixed test signature
has two base categories with functors, profunctors, and transformation
symbols between them, enough to exercise every constructor.
"""

from __future__ import annotations

import random
from typing import Optional

from . import subst as sb
from .checker import check_proterm, infer_term
from .syntax import (
    And,
    BaseT,
    Context,
    Filler,
    FillerElim,
    FillerIntro,
    FunApp,
    Ide,
    IdeElim,
    Pair,
    PPair,
    PProj,
    ProdT,
    ProfApp,
    Procontext,
    Proj,
    Protype,
    Proterm,
    ProVar,
    PUnit,
    Refl,
    Signature,
    Specification,
    Tensor,
    TensorElim,
    TensorIntro,
    Term,
    TermSubst,
    Top,
    TransApp,
    TransSym,
    TypeExpr,
    UNIT,
    UnitTm,
    Var,
    chain_transform,
    identity_subst,
)


def test_signature() -> Specification:
    sig = Signature(
        frozenset({"A", "B"}),
        {"ff": ("A", "A"), "gg": ("A", "B"), "hh": ("B", "B"), "kk": ("B", "A")},
        {"p": ("A", "B"), "q": ("B", "A"), "r": ("A", "A"), "s": ("B", "B")},
        {},
    )
    transforms = {
        "t1": chain_transform(sig, ("p", "q"), "r"),
        "t2": chain_transform(sig, ("r",), "r"),
        "t3": chain_transform(sig, (), "r"),
        "t4": chain_transform(sig, ("q",), "q"),
        "t5": chain_transform(sig, ("p", "s"), "p"),
    }
    sig = Signature(sig.categories, sig.functors, sig.profunctors, transforms)
    return Specification(sig)


class Gen:
    def __init__(self, spec: Optional[Specification] = None, seed: int = 0):
        self.spec = spec or test_signature()
        self.rng = random.Random(seed)
        self.counter = 0

    def fresh(self, stem: str) -> str:
        self.counter += 1
        return f"{stem}{self.counter}"

    # -- types, contexts, terms

    def type_expr(self, depth: int = 2) -> TypeExpr:
        r = self.rng.random()
        if depth == 0 or r < 0.55:
            return BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
        if r < 0.7:
            return UNIT
        return ProdT(self.type_expr(depth - 1), self.type_expr(depth - 1))

    def context(self, max_len: int = 3, depth: int = 2) -> Context:
        n = self.rng.randint(0, max_len)
        return Context(
            tuple((self.fresh("v"), self.type_expr(depth)) for _ in range(n))
        )

    def term(self, ctx: Context, ty: TypeExpr, depth: int = 3) -> Optional[Term]:
        """A term of the given type, or None when none is reachable."""
        candidates = []
        for i, (_, t) in enumerate(ctx.entries):
            for path, sub_ty in _projections(t):
                if sub_ty == ty:
                    candidates.append(_apply_path(Var(i, ctx.names()[i]), path))
        if ty == UNIT:
            candidates.append(UnitTm())
        if depth > 0:
            if isinstance(ty, ProdT):
                a = self.term(ctx, ty.left, depth - 1)
                b = self.term(ctx, ty.right, depth - 1)
                if a is not None and b is not None:
                    candidates.append(Pair(a, b))
            if isinstance(ty, BaseT):
                for name, (src, tgt) in self.spec.sig.functors.items():
                    if tgt == ty.name and self.rng.random() < 0.5:
                        arg = self.term(ctx, BaseT(src), depth - 1)
                        if arg is not None:
                            candidates.append(FunApp(name, arg))
        if not candidates:
            return None
        return self.rng.choice(candidates)

    def subst(self, source: Context, target: Context, depth: int = 3) -> Optional[TermSubst]:
        comps = []
        for _, ty in target:
            t = self.term(source, ty, depth)
            if t is None:
                return None
            comps.append(t)
        return TermSubst(target, tuple(comps))

    def inhabited_context(self, max_len: int = 2) -> Context:
        """A context all of whose types admit closed-ish terms from any
        source; base types only, so substitutions always exist."""
        n = self.rng.randint(1, max_len)
        return Context(
            tuple(
                (self.fresh("v"), BaseT(self.rng.choice(sorted(self.spec.sig.categories))))
                for _ in range(n)
            )
        )

    # -- protypes

    def protype(self, gamma: Context, delta: Context, depth: int = 2) -> Protype:
        choices = ["top", "prof", "ide"]
        if depth > 0:
            choices += ["and", "tensor", "filler"]
        kind = self.rng.choice(choices)
        if kind == "and" and depth > 0:
            return And(
                self.protype(gamma, delta, depth - 1),
                self.protype(gamma, delta, depth - 1),
            )
        if kind == "tensor" and depth > 0:
            ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
            var = self.fresh("m")
            mid = Context(((var, ty),))
            return Tensor(
                var,
                ty,
                self.protype(gamma, mid, depth - 1),
                self.protype(mid, delta, depth - 1),
            )
        if kind == "filler" and depth > 0:
            ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
            var = self.fresh("m")
            bound = Context(((var, ty),))
            return Filler(
                var,
                ty,
                self.protype(bound, gamma, depth - 1),
                self.protype(bound, delta, depth - 1),
            )
        if kind == "prof":
            for name in self.rng.sample(
                sorted(self.spec.sig.profunctors), len(self.spec.sig.profunctors)
            ):
                l, r = self.spec.sig.profunctors[name]
                s = self.term(gamma, BaseT(l), 2)
                t = self.term(delta, BaseT(r), 2)
                if s is not None and t is not None:
                    return ProfApp(name, s, t)
        if kind == "ide":
            ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
            s = self.term(gamma, ty, 2)
            t = self.term(delta, ty, 2)
            if s is not None and t is not None:
                return Ide(ty, s, t)
        return Top()

    def procontext(self, max_hyps: int = 3, ctx_len: int = 2) -> Procontext:
        n = self.rng.randint(0, max_hyps)
        slots = [self.inhabited_context(ctx_len) for _ in range(n + 1)]
        hyps = tuple(
            (self.fresh("a"), self.protype(slots[i], slots[i + 1], 1))
            for i in range(n)
        )
        return Procontext(tuple(slots), hyps)

    # -- proterms (judgment built together with the object)

    def cell(self, depth: int = 3) -> tuple[Procontext, Protype, Proterm]:
        """A well-typed proterm with its procontext and target."""
        builders = [self._cell_atom]
        if depth > 0:
            builders += [
                self._cell_pair,
                self._cell_proj,
                self._cell_transapp,
                self._cell_tensor_intro,
                self._cell_filler_intro,
                self._cell_ide_elim,
                self._cell_tensor_elim,
                self._cell_filler_elim,
            ]
        for _ in range(6):
            builder = self.rng.choice(builders)
            out = builder(depth)
            if out is not None:
                return out
        return self._cell_atom(depth)

    def _cell_atom(self, depth: int):
        kind = self.rng.choice(["provar", "punit", "refl"])
        if kind == "provar":
            gamma = self.inhabited_context()
            delta = self.inhabited_context()
            alpha = self.protype(gamma, delta, 1)
            name = self.fresh("a")
            return (
                Procontext((gamma, delta), ((name, alpha),)),
                alpha,
                ProVar(name),
            )
        if kind == "punit":
            p = self.procontext(2)
            return (p, Top(), PUnit())
        gamma = self.inhabited_context()
        ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
        t = self.term(gamma, ty, 2)
        if t is None:
            return None
        return (Procontext((gamma,)), Ide(ty, t, t), Refl(t))

    def _cell_pair(self, depth: int):
        p, tau, m = self.cell(depth - 1)
        other = self.rng.choice(["unit", "same"])
        if other == "unit":
            return (p, And(tau, Top()), PPair(m, PUnit()))
        return (p, And(tau, tau), PPair(m, m))

    def _cell_proj(self, depth: int):
        got = self._cell_pair(depth)
        if got is None:
            return None
        p, tau, m = got
        side = self.rng.randint(0, 1)
        assert isinstance(tau, And)
        return (p, tau.left if side == 0 else tau.right, PProj(side, m))

    def _cell_transapp(self, depth: int):
        name = self.rng.choice(sorted(self.spec.sig.transformations))
        tsym = self.spec.sig.transformations[name]
        sources = [self.inhabited_context() for _ in tsym.contexts]
        groups = []
        for src, tgt in zip(sources, tsym.contexts):
            s = self.subst(src, tgt, 2)
            if s is None:
                return None
            groups.append(tuple(s.components))
        slots = []
        hyps = []
        args = []
        for i, entry in enumerate(tsym.domain):
            inst = sb.subst_protype(
                entry,
                TermSubst(tsym.contexts[i], groups[i]),
                TermSubst(tsym.contexts[i + 1], groups[i + 1]),
            )
            name_h = self.fresh("a")
            hyps.append((name_h, inst))
            args.append(ProVar(name_h))
        p = Procontext(tuple(sources), tuple(hyps))
        cod = sb.subst_protype(
            tsym.codomain,
            TermSubst(tsym.contexts[0], groups[0]),
            TermSubst(tsym.contexts[-1], groups[-1]),
        )
        return (p, cod, TransApp(name, tuple(groups), tuple(args)))

    def _cell_tensor_intro(self, depth: int):
        ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
        joint = Context(((self.fresh("m"), ty),))
        gamma = self.inhabited_context()
        delta = self.inhabited_context()
        alpha = self.protype(gamma, joint, 1)
        beta = self.protype(joint, delta, 1)
        a, b = self.fresh("a"), self.fresh("b")
        p = Procontext((gamma, joint, delta), ((a, alpha), (b, beta)))
        return (
            p,
            Tensor(joint.names()[0], ty, alpha, beta),
            TensorIntro(ProVar(a), ProVar(b)),
        )

    def _cell_filler_intro(self, depth: int):
        got = self.cell(depth - 1)
        p, tau, m = got
        first = p.slots[0]
        if len(first) != 1 or len(p.hyps) < 1:
            return None
        ty = first.types()[0]
        var = first.names()[0]
        hyp_name, along = p.hyps[0]
        rest = Procontext(p.slots[1:], p.hyps[1:])
        return (
            rest,
            Filler(var, ty, along, tau),
            FillerIntro(var, ty, hyp_name, along, m),
        )

    def _cell_ide_elim(self, depth: int):
        got = self.cell(depth - 1)
        p, tau, m = got
        singles = [k for k, c in enumerate(p.slots) if len(c) == 1]
        if not singles:
            return None
        k = self.rng.choice(singles)
        name = p.slots[k].names()[0]
        ty = p.slots[k].types()[0]
        fresh = self.fresh("z")
        hyp = self.fresh("e")
        new_slots = (
            p.slots[:k]
            + (p.slots[k], Context(((fresh, ty),)))
            + p.slots[k + 1 :]
        )
        new_hyps = (
            p.hyps[:k]
            + ((hyp, Ide(ty, Var(0, name), Var(0, fresh))),)
            + p.hyps[k:]
        )
        return (
            Procontext(new_slots, new_hyps),
            tau,
            IdeElim(hyp, m, name),
        )

    def _cell_tensor_elim(self, depth: int):
        got = self.cell(depth - 1)
        p, tau, m = got
        # an interior singleton slot with hypotheses on both sides
        candidates = [
            k
            for k in range(1, len(p.slots) - 1)
            if len(p.slots[k]) == 1
        ]
        if not candidates:
            return None
        k = self.rng.choice(candidates)
        ty = p.slots[k].types()[0]
        var = p.slots[k].names()[0]
        left_name, left_pt = p.hyps[k - 1]
        right_name, right_pt = p.hyps[k]
        d = self.fresh("d")
        new_slots = p.slots[:k] + p.slots[k + 1 :]
        new_hyps = (
            p.hyps[: k - 1]
            + ((d, Tensor(var, ty, left_pt, right_pt)),)
            + p.hyps[k + 1 :]
        )
        return (
            Procontext(new_slots, new_hyps),
            tau,
            TensorElim(d, left_name, var, right_name, m),
        )

    def _cell_filler_elim(self, depth: int):
        ty = BaseT(self.rng.choice(sorted(self.spec.sig.categories)))
        var = self.fresh("m")
        bound = Context(((var, ty),))
        gamma = self.inhabited_context()
        delta = self.inhabited_context()
        along = self.protype(bound, gamma, 1)
        target = self.protype(bound, delta, 1)
        a, c = self.fresh("a"), self.fresh("c")
        p = Procontext(
            (bound, gamma, delta),
            ((a, along), (c, Filler(var, ty, along, target))),
        )
        return (p, target, FillerElim(ProVar(a), ProVar(c)))

    def checked_cell(self, depth: int = 3, tries: int = 20):
        """A cell that the checker confirms; retries on rare mismatches."""
        for _ in range(tries):
            p, tau, m = self.cell(depth)
            if check_proterm(self.spec, p, m, tau).ok:
                return p, tau, m
        raise RuntimeError("could not generate a checked cell")


def _projections(ty: TypeExpr, path: tuple[int, ...] = ()):
    yield path, ty
    if isinstance(ty, ProdT):
        yield from _projections(ty.left, path + (0,))
        yield from _projections(ty.right, path + (1,))


def _apply_path(t: Term, path: tuple[int, ...]) -> Term:
    for side in path:
        t = Proj(side, t)
    return t
