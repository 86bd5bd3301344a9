"""Proterm normalization and the bounded proterm equality search.

Normalization applies the beta rules (projection/pairing, tensor
elimination over introduction, filler evaluation of an abstraction,
path elimination of refl via composite evaluation), top collapse,
product eta-contraction, iso-expression expansion with inverse
collapse, and partial evaluation of composition residuals.  Equality
beyond that is a breadth-first bidirectional search using the
specification's proterm axioms (and any session-derived rules) as
schematic rewrite rules with first-order matching on term and
provariable metavariables.
"""

from __future__ import annotations

from collections import deque
from typing import Optional, Sequence

from . import subst as sb
from .checker import (
    CheckError,
    DEFAULT_CONFIG,
    OK,
    RewriteConfig,
    Verdict,
    check_proterm,
    infer_proterm,
    fail,
    unknown,
)
from .syntax import (
    And,
    Composite,
    Context,
    Filler,
    FillerElim,
    FillerIntro,
    Ide,
    IdeElim,
    IdIso,
    CompIso,
    InvIso,
    IsoApp,
    IsoExpr,
    PairIso,
    PPair,
    PProj,
    Procontext,
    ProtermAxiom,
    Protype,
    Proterm,
    ProVar,
    PUnit,
    P_UNIT,
    Refl,
    Specification,
    SymIso,
    Tensor,
    TensorElim,
    TensorIntro,
    Term,
    TermSubst,
    ThmIso,
    Top,
    TransApp,
    Var,
    alpha_equal,
)


def proterm_size(m: Proterm) -> int:
    if isinstance(m, (ProVar, PUnit)):
        return 1
    if isinstance(m, Refl):
        return 2
    if isinstance(m, TransApp):
        return 1 + sum(proterm_size(a) for a in m.args) + sum(
            len(g) for g in m.groups
        )
    if isinstance(m, (PPair, TensorIntro, FillerElim)):
        l = m.fst if isinstance(m, PPair) else (m.left if isinstance(m, TensorIntro) else m.arg)
        r = m.snd if isinstance(m, PPair) else (m.right if isinstance(m, TensorIntro) else m.fun)
        return 1 + proterm_size(l) + proterm_size(r)
    if isinstance(m, (PProj, IdeElim, TensorElim, FillerIntro, IsoApp)):
        body = (
            m.body
            if isinstance(m, (PProj, IdeElim, TensorElim, FillerIntro))
            else m.arg
        )
        return 1 + proterm_size(body)
    if isinstance(m, Composite):
        return (
            1
            + proterm_size(m.body)
            + sum(proterm_size(b) for b in m.bindings)
            + sum(len(g) for g in m.subst)
        )
    return 1


def _iso_equal(a: IsoExpr, b: IsoExpr) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, (SymIso, ThmIso)):
        return a.name == b.name
    if isinstance(a, IdIso):
        return a.protype == b.protype
    if isinstance(a, CompIso):
        return _iso_equal(a.after, b.after) and _iso_equal(a.before, b.before)
    if isinstance(a, InvIso):
        return _iso_equal(a.inner, b.inner)
    if isinstance(a, PairIso):
        return alpha_equal(a, b)
    return False


class _Normalizer:
    def __init__(self, spec: Specification, cfg: RewriteConfig):
        self.spec = spec
        self.cfg = cfg
        self.budget = 200  # passes; each pass is a full traversal

    def normalize(
        self,
        p: Procontext,
        m: Proterm,
        target: Optional[Protype],
        lo: int,
        hi: int,
    ) -> Proterm:
        while self.budget > 0:
            self.budget -= 1
            out = self._pass(p, m, target, lo, hi)
            if alpha_equal(out, m):
                return out
            m = out
        return m

    # one bottom-up pass followed by head reduction
    def _pass(
        self,
        p: Procontext,
        m: Proterm,
        target: Optional[Protype],
        lo: int,
        hi: int,
    ) -> Proterm:
        if isinstance(target, Top):
            return P_UNIT
        m = self._subnormalize(p, m, target, lo, hi)
        return self._head(p, m, target, lo, hi)

    def _split2(
        self, p: Procontext, a: Proterm, b: Proterm, lo: int, hi: int
    ) -> Optional[tuple[tuple[int, int], tuple[int, int]]]:
        parts = sb.partitions([a, b], lo, hi, sb.hyp_positions(p))
        if not parts:
            return None
        return parts[0][0], parts[0][1]

    def _subnormalize(
        self,
        p: Procontext,
        m: Proterm,
        target: Optional[Protype],
        lo: int,
        hi: int,
    ) -> Proterm:
        if isinstance(m, (ProVar, PUnit, Refl)):
            return m
        if isinstance(m, PPair):
            lt = target.left if isinstance(target, And) else None
            rt = target.right if isinstance(target, And) else None
            return PPair(
                self._pass(p, m.fst, lt, lo, hi), self._pass(p, m.snd, rt, lo, hi)
            )
        if isinstance(m, PProj):
            return PProj(m.side, self._pass(p, m.body, None, lo, hi))
        if isinstance(m, TransApp):
            if not m.args:
                return m
            parts = sb.partitions(m.args, lo, hi, sb.hyp_positions(p))
            if not parts:
                return m
            part = parts[0]
            args = tuple(
                self._pass(p, a, None, s, e) for a, (s, e) in zip(m.args, part)
            )
            return TransApp(m.sym, m.groups, args)
        if isinstance(m, TensorIntro):
            sp = self._split2(p, m.left, m.right, lo, hi)
            if sp is None:
                return m
            (ls, le), (rs, re) = sp
            lt = target.left if isinstance(target, Tensor) else None
            rt = target.right if isinstance(target, Tensor) else None
            return TensorIntro(
                self._pass(p, m.left, lt, ls, le),
                self._pass(p, m.right, rt, rs, re),
            )
        if isinstance(m, TensorElim):
            i = sb.hyp_positions(p).get(m.hyp)
            if i is None:
                return m
            _, pt = p.hyps[i]
            if not isinstance(pt, Tensor):
                return m
            body_p = sb.split_tensor_slots(p, i)
            body_p = Procontext(
                body_p.slots,
                body_p.hyps[:i]
                + ((m.left, pt.left), (m.right, pt.right))
                + body_p.hyps[i + 2 :],
            )
            body = self._pass(body_p, m.body, target, lo, hi + 1)
            return TensorElim(m.hyp, m.left, m.var, m.right, body)
        if isinstance(m, IdeElim):
            i = sb.hyp_positions(p).get(m.hyp)
            if i is None:
                return m
            try:
                body_p, _ = sb.merge_ide_slots(p, i)
            except sb.SubstError:
                return m
            body = self._pass(body_p, m.body, target, lo, hi - 1)
            return IdeElim(m.hyp, body, m.merged)
        if isinstance(m, FillerIntro):
            sliced = p.sub(lo, hi)
            body_p = sb.filler_intro_body_proctx(sliced, m.var, m.ty, m.hyp, m.along)
            tt = target.target if isinstance(target, Filler) else None
            body = self._pass(body_p, m.body, tt, 0, len(body_p.hyps))
            return FillerIntro(m.var, m.ty, m.hyp, m.along, body)
        if isinstance(m, FillerElim):
            sp = self._split2(p, m.arg, m.fun, lo, hi)
            if sp is None:
                return m
            (ls, le), (rs, re) = sp
            return FillerElim(
                self._pass(p, m.arg, None, ls, le),
                self._pass(p, m.fun, None, rs, re),
            )
        if isinstance(m, IsoApp):
            return IsoApp(m.iso, m.forward, self._pass(p, m.arg, None, lo, hi))
        if isinstance(m, Composite):
            if m.bindings:
                parts = sb.partitions(list(m.bindings), lo, hi, sb.hyp_positions(p))
                if not parts:
                    return m
                part = parts[0]
                bindings = tuple(
                    self._pass(p, b, None, s, e)
                    for b, (s, e) in zip(m.bindings, part)
                )
            else:
                bindings = ()
            inner_norm = _Normalizer(self.spec, self.cfg)
            inner_norm.budget = min(self.budget, 50)
            body = inner_norm.normalize(
                m.inner, m.body, None, 0, len(m.inner.hyps)
            )
            return Composite(m.inner, body, m.subst, bindings)
        return m

    def _head(
        self,
        p: Procontext,
        m: Proterm,
        target: Optional[Protype],
        lo: int,
        hi: int,
    ) -> Proterm:
        if isinstance(m, PProj) and isinstance(m.body, PPair):
            return m.body.fst if m.side == 0 else m.body.snd
        if (
            isinstance(m, PPair)
            and isinstance(m.fst, PProj)
            and isinstance(m.snd, PProj)
            and m.fst.side == 0
            and m.snd.side == 1
            and alpha_equal(m.fst.body, m.snd.body)
        ):
            return m.fst.body
        if isinstance(m, FillerElim) and isinstance(m.fun, FillerIntro):
            out = self._filler_beta(p, m, lo, hi)
            if out is not None:
                return out
        if isinstance(m, IsoApp):
            out = self._iso_step(p, m, lo, hi)
            if out is not None:
                return out
        if isinstance(m, Composite):
            out = self._eval_composite(p, m, lo, hi)
            if out is not None:
                return out
        return m

    def _filler_beta(
        self, p: Procontext, m: FillerElim, lo: int, hi: int
    ) -> Optional[Proterm]:
        fun = m.fun
        assert isinstance(fun, FillerIntro)
        sp = self._split2(p, m.arg, fun, lo, hi)
        if sp is None:
            return None
        (ls, le), (rs, re) = sp
        fun_slice = p.sub(rs, re)
        body_p = sb.filler_intro_body_proctx(
            fun_slice, fun.var, fun.ty, fun.hyp, fun.along
        )
        bindings: list[tuple[Procontext, Proterm]] = [(p.sub(ls, le), m.arg)]
        for j in range(len(fun_slice.hyps)):
            bindings.append(
                (
                    Procontext(
                        (fun_slice.slots[j], fun_slice.slots[j + 1]),
                        (fun_slice.hyps[j],),
                    ),
                    ProVar(fun_slice.hyps[j][0]),
                )
            )
        try:
            _, out = sb.prosubst(body_p, fun.body, bindings)
        except sb.SubstError:
            return None
        return out

    def _iso_step(
        self, p: Procontext, m: IsoApp, lo: int, hi: int
    ) -> Optional[Proterm]:
        w = m.iso
        if isinstance(w, InvIso):
            return IsoApp(w.inner, not m.forward, m.arg)
        # inverse collapse: W{W^-1{x}} and W^-1{W{x}}
        if (
            isinstance(m.arg, IsoApp)
            and m.arg.forward != m.forward
            and _iso_equal(_strip_inv(w)[0], _strip_inv(m.arg.iso)[0])
            and _strip_inv(w)[1] == _strip_inv(m.arg.iso)[1]
        ):
            return m.arg.arg
        if isinstance(w, IdIso):
            return m.arg
        if isinstance(w, CompIso):
            if m.forward:
                return IsoApp(w.after, True, IsoApp(w.before, True, m.arg))
            return IsoApp(w.before, False, IsoApp(w.after, False, m.arg))
        # theorem references stay as they are: they collapse with their
        # inverses by name, and the checker applies them by matching
        if isinstance(w, PairIso):
            hyp = w.fwd_hyp if m.forward else w.bwd_hyp
            body = w.fwd if m.forward else w.bwd
            try:
                arg_ty = infer_proterm(
                    self.spec, p.sub(lo, hi), m.arg, self.cfg
                )
            except CheckError:
                return None
            q = Procontext((p.slots[lo], p.slots[hi]), ((hyp, arg_ty),))
            try:
                _, out = sb.prosubst(q, body, [(p.sub(lo, hi), m.arg)])
            except sb.SubstError:
                return None
            return out
        return None  # symbol applications are normal forms

    def _eval_composite(
        self, p: Procontext, m: Composite, lo: int, hi: int
    ) -> Optional[Proterm]:
        inner = m.inner
        if m.bindings:
            parts = sb.partitions(list(m.bindings), lo, hi, sb.hyp_positions(p))
            if not parts:
                return None
            part = parts[0]
            bounds = [part[0][0]] + [e for (_, e) in part]
        else:
            part = []
            bounds = [lo]
        try:
            subs = [
                TermSubst(inner.slots[j], m.subst[j])
                for j in range(len(inner.slots))
            ]
            new_slots = tuple(p.slots[b] for b in bounds)
            body2 = sb.subst_proterm(inner, m.body, subs, new_slots)
            new_hyps = tuple(
                (inner.hyps[i][0], sb.subst_protype(inner.hyps[i][1], subs[i], subs[i + 1]))
                for i in range(len(inner.hyps))
            )
            inner2 = Procontext(new_slots, new_hyps)
            bindings = [
                (p.sub(s, e), b) for b, (s, e) in zip(m.bindings, part)
            ]
            _, out = sb.prosubst(inner2, body2, bindings)
        except (sb.SubstError, ValueError):
            return None
        if alpha_equal(out, m):
            return None
        if proterm_size(out) > self.cfg.max_size:
            return None
        return out


def _strip_inv(w: IsoExpr) -> tuple[IsoExpr, bool]:
    flips = False
    while isinstance(w, InvIso):
        w = w.inner
        flips = not flips
    return w, flips


def normalize_proterm(
    spec: Specification,
    p: Procontext,
    m: Proterm,
    target: Optional[Protype] = None,
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Proterm:
    return _Normalizer(spec, cfg).normalize(p, m, target, 0, len(p.hyps))


# ---------------------------------------------------------------------------
# schematic matching of proterm axioms


class _MatchFail(Exception):
    pass


# Matching walks the axiom side with its procontext, tagging each slot
# either with its axiom slot id (terms there are per-slot metavariables)
# or as binder-bound (terms there must match exactly, index-wise).
# Binder descent mirrors the checker's procontext surgery.


def _match_term(
    pat: Term,
    inst: Term,
    tag: Optional[int],
    store: dict[tuple[int, int], Term],
) -> None:
    from .syntax import FunApp, Pair, Proj, UnitTm

    if isinstance(pat, Var):
        if tag is None:
            if not (isinstance(inst, Var) and inst.index == pat.index):
                raise _MatchFail()
            return
        key = (tag, pat.index)
        seen = store.get(key)
        if seen is None:
            store[key] = inst
        elif seen != inst:
            raise _MatchFail()
        return
    if isinstance(pat, UnitTm):
        if not isinstance(inst, UnitTm):
            raise _MatchFail()
        return
    if isinstance(pat, Pair) and isinstance(inst, Pair):
        _match_term(pat.fst, inst.fst, tag, store)
        _match_term(pat.snd, inst.snd, tag, store)
        return
    if isinstance(pat, Proj) and isinstance(inst, Proj) and pat.side == inst.side:
        _match_term(pat.body, inst.body, tag, store)
        return
    if isinstance(pat, FunApp) and isinstance(inst, FunApp) and pat.sym == inst.sym:
        _match_term(pat.arg, inst.arg, tag, store)
        return
    raise _MatchFail()


def _match_protype(
    pat: Protype,
    inst: Protype,
    left_tag: Optional[int],
    right_tag: Optional[int],
    store: dict[tuple[int, int], Term],
) -> None:
    from .syntax import ProfApp

    if type(pat) is not type(inst):
        raise _MatchFail()
    if isinstance(pat, Top):
        return
    if isinstance(pat, And):
        _match_protype(pat.left, inst.left, left_tag, right_tag, store)
        _match_protype(pat.right, inst.right, left_tag, right_tag, store)
        return
    if isinstance(pat, ProfApp):
        if pat.sym != inst.sym:
            raise _MatchFail()
        _match_term(pat.left, inst.left, left_tag, store)
        _match_term(pat.right, inst.right, right_tag, store)
        return
    if isinstance(pat, Ide):
        if pat.ty != inst.ty:
            raise _MatchFail()
        _match_term(pat.left, inst.left, left_tag, store)
        _match_term(pat.right, inst.right, right_tag, store)
        return
    if isinstance(pat, Tensor):
        if pat.ty != inst.ty:
            raise _MatchFail()
        _match_protype(pat.left, inst.left, left_tag, None, store)
        _match_protype(pat.right, inst.right, None, right_tag, store)
        return
    if isinstance(pat, Filler):
        if pat.ty != inst.ty:
            raise _MatchFail()
        _match_protype(pat.along, inst.along, None, left_tag, store)
        _match_protype(pat.target, inst.target, None, right_tag, store)
        return
    raise _MatchFail()


class _Matcher:
    """Match a goal subterm against one side of a proterm axiom."""

    def __init__(self) -> None:
        self.terms: dict[tuple[int, int], Term] = {}
        self.pvs: dict[str, Proterm] = {}
        self.binders: dict[str, str] = {}  # pattern binder -> goal binder

    def _bind_pv(self, name: str, goal: Proterm) -> None:
        seen = self.pvs.get(name)
        if seen is None:
            self.pvs[name] = goal
        elif not alpha_equal(seen, goal):
            raise _MatchFail()

    def match(
        self,
        pat: Proterm,
        goal: Proterm,
        p: Procontext,
        tags: tuple[Optional[int], ...],
        lo: int,
        hi: int,
        bound: dict[str, str],
    ) -> None:
        pos = sb.hyp_positions(p)
        if isinstance(pat, ProVar) and pat.name not in bound:
            self._bind_pv(pat.name, goal)
            return
        if isinstance(pat, ProVar):
            if not (isinstance(goal, ProVar) and bound[pat.name] == goal.name):
                raise _MatchFail()
            return
        if type(pat) is not type(goal):
            raise _MatchFail()
        if isinstance(pat, PUnit):
            return
        if isinstance(pat, Refl):
            assert isinstance(goal, Refl)
            _match_term(pat.term, goal.term, tags[lo], self.terms)
            return
        if isinstance(pat, PPair):
            assert isinstance(goal, PPair)
            self.match(pat.fst, goal.fst, p, tags, lo, hi, bound)
            self.match(pat.snd, goal.snd, p, tags, lo, hi, bound)
            return
        if isinstance(pat, PProj):
            assert isinstance(goal, PProj)
            if pat.side != goal.side:
                raise _MatchFail()
            self.match(pat.body, goal.body, p, tags, lo, hi, bound)
            return
        if isinstance(pat, TransApp):
            assert isinstance(goal, TransApp)
            if pat.sym != goal.sym or len(pat.args) != len(goal.args):
                raise _MatchFail()
            for part in sb.partitions(pat.args, lo, hi, pos) or []:
                bounds = [lo] + [e for (_, e) in part] if part else [lo]
                try:
                    save_t, save_p = dict(self.terms), dict(self.pvs)
                    for pg, gg, b in zip(pat.groups, goal.groups, bounds):
                        if len(pg) != len(gg):
                            raise _MatchFail()
                        for tp, tg in zip(pg, gg):
                            _match_term(tp, tg, tags[b], self.terms)
                    for (s, e), pa, ga in zip(part, pat.args, goal.args):
                        self.match(pa, ga, p, tags, s, e, bound)
                    return
                except _MatchFail:
                    self.terms, self.pvs = save_t, save_p
            raise _MatchFail()
        if isinstance(pat, (TensorIntro, FillerElim)):
            pl = pat.left if isinstance(pat, TensorIntro) else pat.arg
            pr = pat.right if isinstance(pat, TensorIntro) else pat.fun
            gl = goal.left if isinstance(goal, TensorIntro) else goal.arg
            gr = goal.right if isinstance(goal, TensorIntro) else goal.fun
            for (ls, le), (rs, re) in sb.partitions([pl, pr], lo, hi, pos) or []:
                try:
                    save_t, save_p = dict(self.terms), dict(self.pvs)
                    self.match(pl, gl, p, tags, ls, le, bound)
                    self.match(pr, gr, p, tags, rs, re, bound)
                    return
                except _MatchFail:
                    self.terms, self.pvs = save_t, save_p
            raise _MatchFail()
        if isinstance(pat, TensorElim):
            assert isinstance(goal, TensorElim)
            i = self._hyp_index(pat.hyp, goal.hyp, p, bound)
            body_p = sb.split_tensor_slots(p, i)
            body_p = Procontext(
                body_p.slots,
                body_p.hyps[:i]
                + ((pat.left, body_p.hyps[i][1]), (pat.right, body_p.hyps[i + 1][1]))
                + body_p.hyps[i + 2 :],
            )
            body_tags = tags[: i + 1] + (None,) + tags[i + 1 :]
            inner = dict(bound)
            inner[pat.left] = goal.left
            inner[pat.right] = goal.right
            self.binders[pat.left] = goal.left
            self.binders[pat.right] = goal.right
            self.match(pat.body, goal.body, body_p, body_tags, lo, hi + 1, inner)
            return
        if isinstance(pat, IdeElim):
            assert isinstance(goal, IdeElim)
            i = self._hyp_index(pat.hyp, goal.hyp, p, bound)
            body_p, _ = sb.merge_ide_slots(p, i)
            body_tags = tags[:i] + (None,) + tags[i + 2 :]
            self.match(pat.body, goal.body, body_p, body_tags, lo, hi - 1, bound)
            return
        if isinstance(pat, FillerIntro):
            assert isinstance(goal, FillerIntro)
            if pat.ty != goal.ty:
                raise _MatchFail()
            _match_protype(pat.along, goal.along, None, tags[lo], self.terms)
            sliced = p.sub(lo, hi)
            body_p = sb.filler_intro_body_proctx(
                sliced, pat.var, pat.ty, pat.hyp, pat.along
            )
            body_tags = (None,) + tags[lo : hi + 1]
            inner = dict(bound)
            inner[pat.hyp] = goal.hyp
            self.binders[pat.hyp] = goal.hyp
            self.match(
                pat.body, goal.body, body_p, body_tags, 0, len(body_p.hyps), inner
            )
            return
        if isinstance(pat, IsoApp):
            assert isinstance(goal, IsoApp)
            if pat.forward != goal.forward or not _iso_equal(pat.iso, goal.iso):
                raise _MatchFail()
            self.match(pat.arg, goal.arg, p, tags, lo, hi, bound)
            return
        if isinstance(pat, Composite):
            assert isinstance(goal, Composite)
            if len(pat.bindings) != len(goal.bindings) or len(pat.subst) != len(
                goal.subst
            ):
                raise _MatchFail()
            if not alpha_equal(pat.inner, goal.inner):
                raise _MatchFail()
            if not alpha_equal(
                pat.body,
                goal.body,
                {pn: gn for (pn, _), (gn, _) in zip(pat.inner.hyps, goal.inner.hyps)},
            ):
                raise _MatchFail()
            parts = (
                sb.partitions(list(pat.bindings), lo, hi, pos)
                if pat.bindings
                else [[]]
            )
            for part in parts or []:
                bounds = [lo] + [e for (_, e) in part] if part else [lo]
                try:
                    save_t, save_p = dict(self.terms), dict(self.pvs)
                    for pg, gg, b in zip(pat.subst, goal.subst, bounds):
                        if len(pg) != len(gg):
                            raise _MatchFail()
                        for tp, tg in zip(pg, gg):
                            _match_term(tp, tg, tags[b], self.terms)
                    for (s, e), pb, gb in zip(part, pat.bindings, goal.bindings):
                        self.match(pb, gb, p, tags, s, e, bound)
                    return
                except _MatchFail:
                    self.terms, self.pvs = save_t, save_p
            raise _MatchFail()
        raise _MatchFail()

    def _hyp_index(
        self, pat_hyp: str, goal_hyp: str, p: Procontext, bound: dict[str, str]
    ) -> int:
        i = p.hyp_index(pat_hyp)
        if i is None:
            raise _MatchFail()
        if pat_hyp in bound:
            if bound[pat_hyp] != goal_hyp:
                raise _MatchFail()
        else:
            self._bind_pv(pat_hyp, ProVar(goal_hyp))
        return i


class _Instantiator:
    """Build the axiom's other side from matched metavariables."""

    def __init__(
        self,
        terms: dict[tuple[int, int], Term],
        pvs: dict[str, Proterm],
        binders: Optional[dict[str, str]] = None,
    ):
        self.terms = terms
        self.pvs = pvs
        self.binders = binders or {}

    def _hyp_name(self, name: str, bound: frozenset[str]) -> str:
        if name in bound:
            return self.binders.get(name, name)
        got = self.pvs.get(name)
        if not isinstance(got, ProVar):
            raise _MatchFail()
        return got.name

    def _term(self, t: Term, tag: Optional[int]) -> Term:
        from .syntax import FunApp, Pair, Proj, UnitTm

        if isinstance(t, Var):
            if tag is None:
                return t
            got = self.terms.get((tag, t.index))
            if got is None:
                raise _MatchFail()
            return got
        if isinstance(t, UnitTm):
            return t
        if isinstance(t, Pair):
            return Pair(self._term(t.fst, tag), self._term(t.snd, tag))
        if isinstance(t, Proj):
            return Proj(t.side, self._term(t.body, tag))
        if isinstance(t, FunApp):
            return FunApp(t.sym, self._term(t.arg, tag))
        raise _MatchFail()

    def _protype(
        self,
        pt: Protype,
        left_tag: Optional[int],
        right_tag: Optional[int],
    ) -> Protype:
        from .syntax import ProfApp

        if isinstance(pt, Top):
            return pt
        if isinstance(pt, And):
            return And(
                self._protype(pt.left, left_tag, right_tag),
                self._protype(pt.right, left_tag, right_tag),
            )
        if isinstance(pt, ProfApp):
            return ProfApp(
                pt.sym, self._term(pt.left, left_tag), self._term(pt.right, right_tag)
            )
        if isinstance(pt, Ide):
            return Ide(
                pt.ty, self._term(pt.left, left_tag), self._term(pt.right, right_tag)
            )
        if isinstance(pt, Tensor):
            return Tensor(
                pt.var,
                pt.ty,
                self._protype(pt.left, left_tag, None),
                self._protype(pt.right, None, right_tag),
            )
        if isinstance(pt, Filler):
            return Filler(
                pt.var,
                pt.ty,
                self._protype(pt.along, None, left_tag),
                self._protype(pt.target, None, right_tag),
            )
        raise _MatchFail()

    def build(
        self,
        m: Proterm,
        p: Procontext,
        tags: tuple[Optional[int], ...],
        lo: int,
        hi: int,
        bound: frozenset[str] = frozenset(),
    ) -> Proterm:
        pos = sb.hyp_positions(p)
        if isinstance(m, ProVar):
            if m.name in bound:
                return ProVar(self.binders.get(m.name, m.name))
            got = self.pvs.get(m.name)
            if got is None:
                raise _MatchFail()
            return got
        if isinstance(m, PUnit):
            return m
        if isinstance(m, Refl):
            return Refl(self._term(m.term, tags[lo]))
        if isinstance(m, PPair):
            return PPair(
                self.build(m.fst, p, tags, lo, hi, bound), self.build(m.snd, p, tags, lo, hi, bound)
            )
        if isinstance(m, PProj):
            return PProj(m.side, self.build(m.body, p, tags, lo, hi, bound))
        if isinstance(m, TransApp):
            parts = sb.partitions(m.args, lo, hi, pos) if m.args else [[]]
            if not parts:
                raise _MatchFail()
            part = parts[0]
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            groups = tuple(
                tuple(self._term(t, tags[b]) for t in g)
                for g, b in zip(m.groups, bounds)
            )
            args = tuple(
                self.build(a, p, tags, s, e, bound) for a, (s, e) in zip(m.args, part)
            )
            return TransApp(m.sym, groups, args)
        if isinstance(m, (TensorIntro, FillerElim)):
            l = m.left if isinstance(m, TensorIntro) else m.arg
            r = m.right if isinstance(m, TensorIntro) else m.fun
            parts = sb.partitions([l, r], lo, hi, pos)
            if not parts:
                raise _MatchFail()
            (ls, le), (rs, re) = parts[0]
            bl = self.build(l, p, tags, ls, le, bound)
            br = self.build(r, p, tags, rs, re, bound)
            return (
                TensorIntro(bl, br) if isinstance(m, TensorIntro) else FillerElim(bl, br)
            )
        if isinstance(m, TensorElim):
            i = p.hyp_index(m.hyp)
            if i is None:
                raise _MatchFail()
            hyp_name = self._hyp_name(m.hyp, bound)
            body_p = sb.split_tensor_slots(p, i)
            body_p = Procontext(
                body_p.slots,
                body_p.hyps[:i]
                + ((m.left, body_p.hyps[i][1]), (m.right, body_p.hyps[i + 1][1]))
                + body_p.hyps[i + 2 :],
            )
            body_tags = tags[: i + 1] + (None,) + tags[i + 1 :]
            return TensorElim(
                hyp_name,
                self.binders.get(m.left, m.left),
                m.var,
                self.binders.get(m.right, m.right),
                self.build(m.body, body_p, body_tags, lo, hi + 1, bound | {m.left, m.right}),
            )
        if isinstance(m, IdeElim):
            i = p.hyp_index(m.hyp)
            if i is None:
                raise _MatchFail()
            hyp_name = self._hyp_name(m.hyp, bound)
            body_p, _ = sb.merge_ide_slots(p, i)
            body_tags = tags[:i] + (None,) + tags[i + 2 :]
            return IdeElim(
                hyp_name, self.build(m.body, body_p, body_tags, lo, hi - 1, bound), m.merged
            )
        if isinstance(m, FillerIntro):
            along = self._protype(m.along, None, tags[lo])
            sliced = p.sub(lo, hi)
            body_p = sb.filler_intro_body_proctx(sliced, m.var, m.ty, m.hyp, m.along)
            body_tags = (None,) + tags[lo : hi + 1]
            return FillerIntro(
                m.var,
                m.ty,
                self.binders.get(m.hyp, m.hyp),
                along,
                self.build(m.body, body_p, body_tags, 0, len(body_p.hyps), bound | {m.hyp}),
            )
        if isinstance(m, IsoApp):
            return IsoApp(m.iso, m.forward, self.build(m.arg, p, tags, lo, hi, bound))
        if isinstance(m, Composite):
            parts = (
                sb.partitions(list(m.bindings), lo, hi, pos) if m.bindings else [[]]
            )
            if not parts:
                raise _MatchFail()
            part = parts[0]
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            groups = tuple(
                tuple(self._term(t, tags[b]) for t in g)
                for g, b in zip(m.subst, bounds)
            )
            bindings = tuple(
                self.build(b, p, tags, s, e, bound) for b, (s, e) in zip(m.bindings, part)
            )
            return Composite(m.inner, m.body, groups, bindings)
        raise _MatchFail()


# ---------------------------------------------------------------------------
# positions and replacement


def proterm_positions(m: Proterm) -> list[tuple[tuple, Proterm]]:
    out: list[tuple[tuple, Proterm]] = []

    def go(x: Proterm, path: tuple) -> None:
        out.append((path, x))
        if isinstance(x, TransApp):
            for i, a in enumerate(x.args):
                go(a, path + (("a", i),))
        elif isinstance(x, PPair):
            go(x.fst, path + (("f",),))
            go(x.snd, path + (("s",),))
        elif isinstance(x, PProj):
            go(x.body, path + (("b",),))
        elif isinstance(x, IdeElim):
            go(x.body, path + (("b",),))
        elif isinstance(x, TensorIntro):
            go(x.left, path + (("f",),))
            go(x.right, path + (("s",),))
        elif isinstance(x, TensorElim):
            go(x.body, path + (("b",),))
        elif isinstance(x, FillerIntro):
            go(x.body, path + (("b",),))
        elif isinstance(x, FillerElim):
            go(x.arg, path + (("f",),))
            go(x.fun, path + (("s",),))
        elif isinstance(x, IsoApp):
            go(x.arg, path + (("b",),))
        elif isinstance(x, Composite):
            for i, b in enumerate(x.bindings):
                go(b, path + (("a", i),))

    go(m, ())
    out.sort(key=lambda e: (-len(e[0]), str(e[0])))
    return out


def proterm_replace(m: Proterm, path: tuple, new: Proterm) -> Proterm:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if isinstance(m, TransApp) and step[0] == "a":
        args = list(m.args)
        args[step[1]] = proterm_replace(args[step[1]], rest, new)
        return TransApp(m.sym, m.groups, tuple(args))
    if isinstance(m, PPair):
        if step[0] == "f":
            return PPair(proterm_replace(m.fst, rest, new), m.snd)
        return PPair(m.fst, proterm_replace(m.snd, rest, new))
    if isinstance(m, PProj):
        return PProj(m.side, proterm_replace(m.body, rest, new))
    if isinstance(m, IdeElim):
        return IdeElim(m.hyp, proterm_replace(m.body, rest, new), m.merged)
    if isinstance(m, TensorIntro):
        if step[0] == "f":
            return TensorIntro(proterm_replace(m.left, rest, new), m.right)
        return TensorIntro(m.left, proterm_replace(m.right, rest, new))
    if isinstance(m, TensorElim):
        return TensorElim(
            m.hyp, m.left, m.var, m.right, proterm_replace(m.body, rest, new)
        )
    if isinstance(m, FillerIntro):
        return FillerIntro(
            m.var, m.ty, m.hyp, m.along, proterm_replace(m.body, rest, new)
        )
    if isinstance(m, FillerElim):
        if step[0] == "f":
            return FillerElim(proterm_replace(m.arg, rest, new), m.fun)
        return FillerElim(m.arg, proterm_replace(m.fun, rest, new))
    if isinstance(m, IsoApp):
        return IsoApp(m.iso, m.forward, proterm_replace(m.arg, rest, new))
    if isinstance(m, Composite) and step[0] == "a":
        bindings = list(m.bindings)
        bindings[step[1]] = proterm_replace(bindings[step[1]], rest, new)
        return Composite(m.inner, m.body, m.subst, tuple(bindings))
    raise CheckError("bad proterm rewrite path")


# ---------------------------------------------------------------------------
# the equality search


def _rule_rewrites(
    spec: Specification,
    p: Procontext,
    beta: Protype,
    m: Proterm,
    rules: Sequence[tuple[ProtermAxiom, bool]],
    cfg: RewriteConfig,
) -> list[Proterm]:
    out: list[Proterm] = []
    positions = proterm_positions(m)
    for ax, forward in rules:
        lhs, rhs = (ax.lhs, ax.rhs) if forward else (ax.rhs, ax.lhs)
        n = len(ax.proctx.hyps)
        tags: tuple[Optional[int], ...] = tuple(range(n + 1))
        for path, sub in positions:
            matcher = _Matcher()
            try:
                matcher.match(lhs, sub, ax.proctx, tags, 0, n, {})
                built = _Instantiator(
                    matcher.terms, matcher.pvs, matcher.binders
                ).build(rhs, ax.proctx, tags, 0, n)
            except (_MatchFail, sb.SubstError):
                continue
            try:
                candidate = proterm_replace(m, path, built)
            except CheckError:
                continue
            if proterm_size(candidate) > cfg.max_size:
                continue
            candidate = normalize_proterm(spec, p, candidate, beta, cfg)
            v = check_proterm(spec, p, candidate, beta, cfg)
            if v.ok:
                out.append(candidate)
    return out


def canon_rename(m: Proterm, env: dict[str, str], counter: list[int]) -> Proterm:
    """Rename all bound provariables canonically; free ones via env.

    Structural equality on the result is alpha equality, so renamed
    proterms serve as visited-set keys in the search.
    """

    def fresh() -> str:
        counter[0] += 1
        return f"${counter[0]}"

    if isinstance(m, ProVar):
        return ProVar(env.get(m.name, m.name))
    if isinstance(m, (PUnit, Refl)):
        return m
    if isinstance(m, PPair):
        return PPair(canon_rename(m.fst, env, counter), canon_rename(m.snd, env, counter))
    if isinstance(m, PProj):
        return PProj(m.side, canon_rename(m.body, env, counter))
    if isinstance(m, TransApp):
        return TransApp(
            m.sym, m.groups, tuple(canon_rename(a, env, counter) for a in m.args)
        )
    if isinstance(m, IdeElim):
        return IdeElim(env.get(m.hyp, m.hyp), canon_rename(m.body, env, counter))
    if isinstance(m, TensorIntro):
        return TensorIntro(
            canon_rename(m.left, env, counter), canon_rename(m.right, env, counter)
        )
    if isinstance(m, TensorElim):
        e2 = dict(env)
        l, r = fresh(), fresh()
        e2[m.left] = l
        e2[m.right] = r
        return TensorElim(
            env.get(m.hyp, m.hyp), l, m.var, r, canon_rename(m.body, e2, counter)
        )
    if isinstance(m, FillerIntro):
        e2 = dict(env)
        h = fresh()
        e2[m.hyp] = h
        return FillerIntro(m.var, m.ty, h, m.along, canon_rename(m.body, e2, counter))
    if isinstance(m, FillerElim):
        return FillerElim(
            canon_rename(m.arg, env, counter), canon_rename(m.fun, env, counter)
        )
    if isinstance(m, IsoApp):
        return IsoApp(m.iso, m.forward, canon_rename(m.arg, env, counter))
    if isinstance(m, Composite):
        e2: dict[str, str] = {}
        new_hyps = []
        for n, pt in m.inner.hyps:
            h = fresh()
            e2[n] = h
            new_hyps.append((h, pt))
        inner = Procontext(m.inner.slots, tuple(new_hyps))
        return Composite(
            inner,
            canon_rename(m.body, e2, counter),
            m.subst,
            tuple(canon_rename(b, env, counter) for b in m.bindings),
        )
    raise CheckError(f"unknown proterm {type(m).__name__}")


def _key(m: Proterm) -> Proterm:
    return canon_rename(m, {}, [0])


def check_proterm_eq(
    spec: Specification,
    p: Procontext,
    m: Proterm,
    n: Proterm,
    beta: Protype,
    cfg: RewriteConfig = DEFAULT_CONFIG,
    extra_rules: Sequence[ProtermAxiom] = (),
) -> Verdict:
    """Definitional normalization, then bounded bidirectional rewriting."""
    vm = check_proterm(spec, p, m, beta, cfg)
    if not vm.ok:
        return fail(f"left side: {vm.reason}") if vm.status == "fail" else vm
    vn = check_proterm(spec, p, n, beta, cfg)
    if not vn.ok:
        return fail(f"right side: {vn.reason}") if vn.status == "fail" else vn
    nm = normalize_proterm(spec, p, m, beta, cfg)
    nn = normalize_proterm(spec, p, n, beta, cfg)
    if alpha_equal(nm, nn):
        return OK
    rules: list[tuple[ProtermAxiom, bool]] = []
    for ax in tuple(spec.proterm_axioms) + tuple(extra_rules):
        rules.append((ax, True))
        rules.append((ax, False))
    evidence = (str(nm), str(nn))
    if not rules:
        return Verdict("fail", "distinct normal forms and no axioms apply", evidence)
    left: dict[Proterm, None] = {_key(nm): None}
    right: dict[Proterm, None] = {_key(nn): None}
    frontier_l: deque[Proterm] = deque([nm])
    frontier_r: deque[Proterm] = deque([nn])
    fuel = cfg.fuel
    while fuel > 0 and (frontier_l or frontier_r):
        expand_left = bool(frontier_l) and (not frontier_r or len(left) <= len(right))
        frontier = frontier_l if expand_left else frontier_r
        mine = left if expand_left else right
        theirs = right if expand_left else left
        cur = frontier.popleft()
        for nxt in _rule_rewrites(spec, p, beta, cur, rules, cfg):
            fuel -= 1
            key = _key(nxt)
            if key in theirs:
                return OK
            if key not in mine:
                mine[key] = None
                frontier.append(nxt)
            if fuel <= 0:
                break
    if not frontier_l and not frontier_r:
        return Verdict("fail", "equality search exhausted all rewrites", evidence)
    return Verdict("unknown", "fuel exhausted", evidence)
