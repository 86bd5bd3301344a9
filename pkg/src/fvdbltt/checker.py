"""Judgment checking and the definitional fragment of the equality theory.

Well-formedness and type inference follow the derivation rules
directly.  Term equality is decided on eta-long beta-normal forms and
extended by bounded bidirectional rewriting with the specification's
term axioms.  Proterm normalization implements the beta rules for
products, path, tensor, and filler constructors plus partial evaluation
of composition residuals; the eta laws of path/tensor/filler stay
axiom-level (see rewrite.py for the proterm equality search).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import subst as sb
from .syntax import (
    And,
    BaseT,
    Composite,
    Context,
    Diagnostic,
    Filler,
    FillerElim,
    FillerIntro,
    FunApp,
    Ide,
    IdeElim,
    IdIso,
    CompIso,
    InvIso,
    IsoApp,
    IsoExpr,
    Pair,
    PairIso,
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
    TOP,
    TransApp,
    TypeExpr,
    UNIT,
    UNIT_TM,
    UnitT,
    UnitTm,
    Var,
    alpha_equal,
)


class CheckError(Exception):
    """A judgment failed to check; carries a located reason."""


@dataclass(frozen=True)
class Verdict:
    status: str  # "ok" | "fail" | "unknown"
    reason: str = ""
    evidence: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def __str__(self) -> str:
        if self.status == "ok":
            return "ok"
        return f"{self.status}: {self.reason}"


OK = Verdict("ok")


def fail(reason: str) -> Verdict:
    return Verdict("fail", reason)


def unknown(reason: str) -> Verdict:
    return Verdict("unknown", reason)


@dataclass(frozen=True)
class RewriteConfig:
    fuel: int = 1000
    max_size: int = 10000

    def __post_init__(self) -> None:
        if self.fuel <= 0 or self.max_size <= 0:
            raise ValueError("fuel and max-size must be positive")


DEFAULT_CONFIG = RewriteConfig()


# ---------------------------------------------------------------------------
# types, contexts, terms


def check_type(spec: Specification, ty: TypeExpr) -> Verdict:
    if isinstance(ty, BaseT):
        if ty.name in spec.sig.categories:
            return OK
        return fail(f"undeclared category {ty.name!r}")
    if isinstance(ty, UnitT):
        return OK
    if isinstance(ty, ProdT):
        left = check_type(spec, ty.left)
        return left if not left.ok else check_type(spec, ty.right)
    return fail(f"unknown type node {type(ty).__name__}")


def check_context(spec: Specification, gamma: Context) -> Verdict:
    for name, ty in gamma:
        v = check_type(spec, ty)
        if not v.ok:
            return fail(f"variable {name!r}: {v.reason}")
    return OK


def infer_term(spec: Specification, gamma: Context, t: Term) -> TypeExpr:
    if isinstance(t, Var):
        if not 0 <= t.index < len(gamma):
            raise CheckError(f"unbound variable {t}")
        return gamma.types()[t.index]
    if isinstance(t, UnitTm):
        return UNIT
    if isinstance(t, Pair):
        return ProdT(infer_term(spec, gamma, t.fst), infer_term(spec, gamma, t.snd))
    if isinstance(t, Proj):
        ty = infer_term(spec, gamma, t.body)
        if not isinstance(ty, ProdT):
            raise CheckError(f"projection of non-product {t.body} : {ty}")
        return ty.left if t.side == 0 else ty.right
    if isinstance(t, FunApp):
        fn = spec.sig.functors.get(t.sym)
        if fn is None:
            raise CheckError(f"undeclared functor {t.sym!r}")
        src, tgt = fn
        arg_ty = infer_term(spec, gamma, t.arg)
        if arg_ty != BaseT(src):
            raise CheckError(f"{t.sym} expects {src}, got {arg_ty}")
        return BaseT(tgt)
    raise CheckError(f"unknown term node {type(t).__name__}")


def check_term(
    spec: Specification, gamma: Context, t: Term, ty: TypeExpr
) -> Verdict:
    try:
        got = infer_term(spec, gamma, t)
    except CheckError as e:
        return fail(str(e))
    if got != ty:
        return fail(f"term {t} has type {got}, expected {ty}")
    return OK


def check_term_subst(
    spec: Specification, gamma: Context, s: TermSubst
) -> Verdict:
    for t, (name, ty) in zip(s.components, s.target):
        v = check_term(spec, gamma, t, ty)
        if not v.ok:
            return fail(f"component for {name!r}: {v.reason}")
    return OK


# ---------------------------------------------------------------------------
# term normalization: eta-long canonical forms and the public contracted form


def whnf(t: Term) -> Term:
    if isinstance(t, Proj):
        body = whnf(t.body)
        if isinstance(body, Pair):
            return whnf(body.fst if t.side == 0 else body.snd)
        return Proj(t.side, body)
    return t


def canonical_term(spec: Specification, gamma: Context, t: Term, ty: TypeExpr) -> Term:
    """Eta-long beta-normal form; decides the pure product fragment."""
    if isinstance(ty, UnitT):
        return UNIT_TM
    if isinstance(ty, ProdT):
        w = whnf(t)
        if isinstance(w, Pair):
            return Pair(
                canonical_term(spec, gamma, w.fst, ty.left),
                canonical_term(spec, gamma, w.snd, ty.right),
            )
        return Pair(
            canonical_term(spec, gamma, Proj(0, w), ty.left),
            canonical_term(spec, gamma, Proj(1, w), ty.right),
        )
    w = whnf(t)
    if isinstance(w, Var):
        return w
    if isinstance(w, FunApp):
        fn = spec.sig.functors.get(w.sym)
        if fn is None:
            raise CheckError(f"undeclared functor {w.sym!r}")
        return FunApp(w.sym, canonical_term(spec, gamma, w.arg, BaseT(fn[0])))
    if isinstance(w, Proj):
        # neutral projection spine: nothing below can reduce further
        return w
    raise CheckError(f"no canonical form for {w} at {ty}")


def _contract(t: Term) -> Term:
    if isinstance(t, Pair):
        a = _contract(t.fst)
        b = _contract(t.snd)
        if (
            isinstance(a, Proj)
            and isinstance(b, Proj)
            and a.side == 0
            and b.side == 1
            and a.body == b.body
        ):
            return a.body
        return Pair(a, b)
    if isinstance(t, Proj):
        return Proj(t.side, _contract(t.body))
    if isinstance(t, FunApp):
        return FunApp(t.sym, _contract(t.arg))
    return t


def normalize_term(
    spec: Specification, gamma: Context, t: Term, ty: Optional[TypeExpr] = None
) -> Term:
    """Beta-reduce projections, collapse unit-typed terms, eta-contract."""
    if ty is None:
        ty = infer_term(spec, gamma, t)
    return _contract(canonical_term(spec, gamma, t, ty))


def term_size(t: Term) -> int:
    if isinstance(t, (Var, UnitTm)):
        return 1
    if isinstance(t, Pair):
        return 1 + term_size(t.fst) + term_size(t.snd)
    if isinstance(t, (Proj, FunApp)):
        return 1 + term_size(t.body if isinstance(t, Proj) else t.arg)
    return 1


# ---------------------------------------------------------------------------
# term equality: canonical comparison plus bounded axiom rewriting


def _term_match(
    pat: Term, inst: Term, store: dict[int, Term]
) -> Optional[dict[int, Term]]:
    if isinstance(pat, Var):
        seen = store.get(pat.index)
        if seen is None:
            store[pat.index] = inst
            return store
        return store if seen == inst else None
    if isinstance(pat, UnitTm):
        return store if isinstance(whnf(inst), UnitTm) or inst == pat else None
    if isinstance(pat, Pair) and isinstance(inst, Pair):
        s = _term_match(pat.fst, inst.fst, store)
        return None if s is None else _term_match(pat.snd, inst.snd, s)
    if isinstance(pat, Proj) and isinstance(inst, Proj) and pat.side == inst.side:
        return _term_match(pat.body, inst.body, store)
    if isinstance(pat, FunApp) and isinstance(inst, FunApp) and pat.sym == inst.sym:
        return _term_match(pat.arg, inst.arg, store)
    return None


def _term_positions(t: Term) -> list[tuple[tuple[int, ...], Term]]:
    out: list[tuple[tuple[int, ...], Term]] = []

    def go(x: Term, path: tuple[int, ...]) -> None:
        if isinstance(x, Pair):
            go(x.fst, path + (0,))
            go(x.snd, path + (1,))
        elif isinstance(x, Proj):
            go(x.body, path + (0,))
        elif isinstance(x, FunApp):
            go(x.arg, path + (0,))
        out.append((path, x))

    go(t, ())
    # leftmost-innermost: deeper first, then by path
    out.sort(key=lambda e: (-len(e[0]), e[0]))
    return out


def _term_replace(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    if isinstance(t, Pair):
        if path[0] == 0:
            return Pair(_term_replace(t.fst, path[1:], new), t.snd)
        return Pair(t.fst, _term_replace(t.snd, path[1:], new))
    if isinstance(t, Proj):
        return Proj(t.side, _term_replace(t.body, path[1:], new))
    if isinstance(t, FunApp):
        return FunApp(t.sym, _term_replace(t.arg, path[1:], new))
    raise CheckError("bad rewrite path")


def _instantiate_term(pat: Term, store: dict[int, Term]) -> Optional[Term]:
    if isinstance(pat, Var):
        return store.get(pat.index)
    if isinstance(pat, UnitTm):
        return pat
    if isinstance(pat, Pair):
        a = _instantiate_term(pat.fst, store)
        b = _instantiate_term(pat.snd, store)
        return None if a is None or b is None else Pair(a, b)
    if isinstance(pat, Proj):
        b = _instantiate_term(pat.body, store)
        return None if b is None else Proj(pat.side, b)
    if isinstance(pat, FunApp):
        a = _instantiate_term(pat.arg, store)
        return None if a is None else FunApp(pat.sym, a)
    return None


def _term_rule_rewrites(
    spec: Specification,
    gamma: Context,
    t: Term,
    ty: TypeExpr,
    cfg: RewriteConfig,
) -> list[Term]:
    """All single-step rewrites of t by the term axioms, both directions."""
    out: list[Term] = []
    rules: list[tuple[Term, Term, Context]] = []
    for ax in spec.term_axioms:
        rules.append((ax.lhs, ax.rhs, ax.context))
        rules.append((ax.rhs, ax.lhs, ax.context))
    if not rules:
        return out
    positions = _term_positions(t)
    for lhs, rhs, ax_ctx in rules:
        for path, sub in positions:
            store: dict[int, Term] = {}
            if _term_match(lhs, sub, store) is None:
                continue
            # matched metavariables must inhabit the axiom's context types
            try:
                if any(
                    infer_term(spec, gamma, inst) != ax_ctx.types()[i]
                    for i, inst in store.items()
                ):
                    continue
            except CheckError:
                continue
            built = _instantiate_term(rhs, store)
            if built is None:
                continue
            candidate = _term_replace(t, path, built)
            if term_size(candidate) <= cfg.max_size:
                try:
                    out.append(normalize_term(spec, gamma, candidate, ty))
                except CheckError:
                    continue
    return out


def check_term_eq(
    spec: Specification,
    gamma: Context,
    s: Term,
    t: Term,
    ty: TypeExpr,
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Verdict:
    """Canonical comparison, then bidirectional breadth-first search."""
    try:
        cs = canonical_term(spec, gamma, s, ty)
        ct = canonical_term(spec, gamma, t, ty)
    except CheckError as e:
        return fail(str(e))
    if cs == ct:
        return OK
    if not spec.term_axioms:
        return Verdict(
            "fail",
            "distinct normal forms and no axioms apply",
            (str(normalize_term(spec, gamma, s, ty)), str(normalize_term(spec, gamma, t, ty))),
        )
    ns = _contract(cs)
    nt = _contract(ct)
    left: dict[Term, None] = {ns: None}
    right: dict[Term, None] = {nt: None}
    frontier_l: deque[Term] = deque([ns])
    frontier_r: deque[Term] = deque([nt])
    fuel = cfg.fuel
    while fuel > 0 and (frontier_l or frontier_r):
        # expand the smaller side
        expand_left = bool(frontier_l) and (
            not frontier_r or len(left) <= len(right)
        )
        frontier = frontier_l if expand_left else frontier_r
        mine = left if expand_left else right
        theirs = right if expand_left else left
        cur = frontier.popleft()
        for nxt in _term_rule_rewrites(spec, gamma, cur, ty, cfg):
            fuel -= 1
            if nxt in theirs:
                return OK
            if nxt not in mine:
                mine[nxt] = None
                frontier.append(nxt)
            if fuel <= 0:
                break
    if not frontier_l and not frontier_r:
        return Verdict("fail", "equality search exhausted all rewrites", (str(ns), str(nt)))
    return Verdict("unknown", "fuel exhausted", (str(ns), str(nt)))


# ---------------------------------------------------------------------------
# protypes


def check_protype(
    spec: Specification,
    gamma: Context,
    delta: Context,
    pt: Protype,
) -> Verdict:
    if isinstance(pt, Top):
        return OK
    if isinstance(pt, And):
        v = check_protype(spec, gamma, delta, pt.left)
        return v if not v.ok else check_protype(spec, gamma, delta, pt.right)
    if isinstance(pt, ProfApp):
        sym = spec.sig.profunctors.get(pt.sym)
        if sym is None:
            return fail(f"undeclared profunctor {pt.sym!r}")
        v = check_term(spec, gamma, pt.left, BaseT(sym[0]))
        if not v.ok:
            return fail(f"left side of {pt.sym}: {v.reason}")
        v = check_term(spec, delta, pt.right, BaseT(sym[1]))
        if not v.ok:
            return fail(f"right side of {pt.sym}: {v.reason}")
        return OK
    if isinstance(pt, Ide):
        v = check_type(spec, pt.ty)
        if not v.ok:
            return v
        v = check_term(spec, gamma, pt.left, pt.ty)
        if not v.ok:
            return fail(f"left side of path protype: {v.reason}")
        v = check_term(spec, delta, pt.right, pt.ty)
        if not v.ok:
            return fail(f"right side of path protype: {v.reason}")
        return OK
    if isinstance(pt, Tensor):
        v = check_type(spec, pt.ty)
        if not v.ok:
            return v
        mid = Context(((pt.var or "x", pt.ty),))
        v = check_protype(spec, gamma, mid, pt.left)
        if not v.ok:
            return fail(f"tensor left: {v.reason}")
        v = check_protype(spec, mid, delta, pt.right)
        return v if v.ok else fail(f"tensor right: {v.reason}")
    if isinstance(pt, Filler):
        v = check_type(spec, pt.ty)
        if not v.ok:
            return v
        bound = Context(((pt.var or "x", pt.ty),))
        v = check_protype(spec, bound, gamma, pt.along)
        if not v.ok:
            return fail(f"filler source: {v.reason}")
        v = check_protype(spec, bound, delta, pt.target)
        return v if v.ok else fail(f"filler target: {v.reason}")
    return fail(f"unknown protype node {type(pt).__name__}")


def normalize_protype(
    spec: Specification, gamma: Context, delta: Context, pt: Protype
) -> Protype:
    """Normalize every term inside the protype (frame conversion)."""
    if isinstance(pt, Top):
        return pt
    if isinstance(pt, And):
        return And(
            normalize_protype(spec, gamma, delta, pt.left),
            normalize_protype(spec, gamma, delta, pt.right),
        )
    if isinstance(pt, ProfApp):
        l, r = spec.sig.profunctors[pt.sym]
        return ProfApp(
            pt.sym,
            canonical_term(spec, gamma, pt.left, BaseT(l)),
            canonical_term(spec, delta, pt.right, BaseT(r)),
        )
    if isinstance(pt, Ide):
        return Ide(
            pt.ty,
            canonical_term(spec, gamma, pt.left, pt.ty),
            canonical_term(spec, delta, pt.right, pt.ty),
        )
    if isinstance(pt, Tensor):
        mid = Context(((pt.var or "x", pt.ty),))
        return Tensor(
            pt.var,
            pt.ty,
            normalize_protype(spec, gamma, mid, pt.left),
            normalize_protype(spec, mid, delta, pt.right),
        )
    if isinstance(pt, Filler):
        bound = Context(((pt.var or "x", pt.ty),))
        return Filler(
            pt.var,
            pt.ty,
            normalize_protype(spec, bound, gamma, pt.along),
            normalize_protype(spec, bound, delta, pt.target),
        )
    raise CheckError(f"unknown protype node {type(pt).__name__}")


def protype_equal(
    spec: Specification,
    gamma: Context,
    delta: Context,
    a: Protype,
    b: Protype,
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Verdict:
    """Protype equality: structural with term equality at the leaves."""
    if type(a) is not type(b):
        return fail(f"protype shapes differ: {a} vs {b}")
    if isinstance(a, Top):
        return OK
    if isinstance(a, And):
        v = protype_equal(spec, gamma, delta, a.left, b.left, cfg)
        if not v.ok:
            return v
        return protype_equal(spec, gamma, delta, a.right, b.right, cfg)
    if isinstance(a, ProfApp):
        assert isinstance(b, ProfApp)
        if a.sym != b.sym:
            return fail(f"profunctor symbols differ: {a.sym} vs {b.sym}")
        l, r = spec.sig.profunctors[a.sym]
        v = check_term_eq(spec, gamma, a.left, b.left, BaseT(l), cfg)
        if not v.ok:
            return v
        return check_term_eq(spec, delta, a.right, b.right, BaseT(r), cfg)
    if isinstance(a, Ide):
        assert isinstance(b, Ide)
        if a.ty != b.ty:
            return fail(f"path types differ: {a.ty} vs {b.ty}")
        v = check_term_eq(spec, gamma, a.left, b.left, a.ty, cfg)
        if not v.ok:
            return v
        return check_term_eq(spec, delta, a.right, b.right, a.ty, cfg)
    if isinstance(a, Tensor):
        assert isinstance(b, Tensor)
        if a.ty != b.ty:
            return fail("tensor binder types differ")
        mid = Context(((a.var or "x", a.ty),))
        v = protype_equal(spec, gamma, mid, a.left, b.left, cfg)
        if not v.ok:
            return v
        return protype_equal(spec, mid, delta, a.right, b.right, cfg)
    if isinstance(a, Filler):
        assert isinstance(b, Filler)
        if a.ty != b.ty:
            return fail("filler binder types differ")
        bound = Context(((a.var or "x", a.ty),))
        v = protype_equal(spec, bound, gamma, a.along, b.along, cfg)
        if not v.ok:
            return v
        return protype_equal(spec, bound, delta, a.target, b.target, cfg)
    return fail(f"unknown protype node {type(a).__name__}")


def check_procontext(spec: Specification, p: Procontext) -> Verdict:
    for c in p.slots:
        v = check_context(spec, c)
        if not v.ok:
            return v
    for i, (name, pt) in enumerate(p.hyps):
        v = check_protype(spec, p.slots[i], p.slots[i + 1], pt)
        if not v.ok:
            return fail(f"hypothesis {name!r}: {v.reason}")
    names = p.hyp_names()
    if len(set(names)) != len(names):
        return fail("duplicate provariable names")
    return OK


# ---------------------------------------------------------------------------
# proterm inference and checking


def _singleton_type(c: Context) -> Optional[TypeExpr]:
    if len(c) == 1:
        return c.types()[0]
    return None


def iso_sides(
    spec: Specification, w: IsoExpr
) -> Optional[tuple[Context, Context, Protype, Protype]]:
    """Frame and sides of an iso expression, when shape-determined."""
    if isinstance(w, SymIso):
        decl = spec.isos.get(w.name)
        if decl is None:
            return None
        lname, rname = decl
        ls, rs = spec.sig.profunctors[lname]
        gamma = Context((("x", BaseT(ls)),))
        delta = Context((("y", BaseT(rs)),))
        return (
            gamma,
            delta,
            ProfApp(lname, Var(0, "x"), Var(0, "y")),
            ProfApp(rname, Var(0, "x"), Var(0, "y")),
        )
    if isinstance(w, ThmIso):
        return (w.left_ctx, w.right_ctx, w.lhs, w.rhs)
    if isinstance(w, InvIso):
        s = iso_sides(spec, w.inner)
        if s is None:
            return None
        return (s[0], s[1], s[3], s[2])
    if isinstance(w, IdIso):
        return None  # frame not recoverable; handled positionally
    return None


def protype_match(
    pattern: Protype,
    inst: Protype,
    n_left: int,
    n_right: int,
) -> Optional[tuple[dict[int, Term], dict[int, Term]]]:
    """Match inst against a pattern whose free sides are metavariables.

    ``n_left``/``n_right`` are the pattern frame arities; bound binder
    slots inside the pattern must match exactly.
    """
    left_store: dict[int, Term] = {}
    right_store: dict[int, Term] = {}

    def match_term(p: Term, i: Term, store: Optional[dict[int, Term]]) -> bool:
        # store None means the side is binder-bound: exact match required
        if store is None:
            return p == i
        if isinstance(p, Var):
            seen = store.get(p.index)
            if seen is None:
                store[p.index] = i
                return True
            return seen == i
        if isinstance(p, UnitTm):
            return isinstance(i, UnitTm)
        if isinstance(p, Pair) and isinstance(i, Pair):
            return match_term(p.fst, i.fst, store) and match_term(p.snd, i.snd, store)
        if isinstance(p, Proj) and isinstance(i, Proj) and p.side == i.side:
            return match_term(p.body, i.body, store)
        if isinstance(p, FunApp) and isinstance(i, FunApp) and p.sym == i.sym:
            return match_term(p.arg, i.arg, store)
        return False

    def go(p: Protype, i: Protype, ls: Optional[dict[int, Term]], rs: Optional[dict[int, Term]]) -> bool:
        if type(p) is not type(i):
            return False
        if isinstance(p, Top):
            return True
        if isinstance(p, And):
            assert isinstance(i, And)
            return go(p.left, i.left, ls, rs) and go(p.right, i.right, ls, rs)
        if isinstance(p, ProfApp):
            assert isinstance(i, ProfApp)
            return (
                p.sym == i.sym
                and match_term(p.left, i.left, ls)
                and match_term(p.right, i.right, rs)
            )
        if isinstance(p, Ide):
            assert isinstance(i, Ide)
            return (
                p.ty == i.ty
                and match_term(p.left, i.left, ls)
                and match_term(p.right, i.right, rs)
            )
        if isinstance(p, Tensor):
            assert isinstance(i, Tensor)
            return (
                p.ty == i.ty
                and go(p.left, i.left, ls, None)
                and go(p.right, i.right, None, rs)
            )
        if isinstance(p, Filler):
            assert isinstance(i, Filler)
            return (
                p.ty == i.ty
                and go(p.along, i.along, None, ls)
                and go(p.target, i.target, None, rs)
            )
        return False

    if not go(pattern, inst, left_store, right_store):
        return None
    return left_store, right_store


def _stores_to_subst(
    store: dict[int, Term], target: Context
) -> Optional[TermSubst]:
    comps = []
    for i in range(len(target)):
        t = store.get(i)
        if t is None:
            return None
        comps.append(t)
    return TermSubst(target, tuple(comps))


class _Infer:
    """Proterm type inference over procontext spans."""

    def __init__(self, spec: Specification, p: Procontext, cfg: RewriteConfig):
        self.spec = spec
        self.p = p
        self.cfg = cfg
        self.pos = sb.hyp_positions(p)

    def frame(self, lo: int, hi: int) -> tuple[Context, Context]:
        return self.p.slots[lo], self.p.slots[hi]

    def infer(self, m: Proterm, lo: int, hi: int) -> Protype:
        spec, p = self.spec, self.p
        if isinstance(m, ProVar):
            i = self.pos.get(m.name)
            if i is None:
                raise CheckError(f"unknown provariable {m.name!r}")
            if (lo, hi) != (i, i + 1):
                raise CheckError(
                    f"provariable {m.name!r} does not span hypotheses [{lo},{hi})"
                )
            return p.hyps[i][1]
        if isinstance(m, PUnit):
            return TOP
        if isinstance(m, PPair):
            return And(self.infer(m.fst, lo, hi), self.infer(m.snd, lo, hi))
        if isinstance(m, PProj):
            inner = self.infer(m.body, lo, hi)
            if not isinstance(inner, And):
                raise CheckError(f"projection of non-meet protype {inner}")
            return inner.left if m.side == 0 else inner.right
        if isinstance(m, Refl):
            if lo != hi:
                raise CheckError("refl needs an empty hypothesis span")
            ty = infer_term(spec, p.slots[lo], m.term)
            return Ide(ty, m.term, m.term)
        if isinstance(m, TransApp):
            return self._infer_transapp(m, lo, hi)
        if isinstance(m, TensorIntro):
            return self._infer_tensor_intro(m, lo, hi)
        if isinstance(m, TensorElim):
            return self._infer_tensor_elim(m, lo, hi)
        if isinstance(m, IdeElim):
            return self._infer_ide_elim(m, lo, hi)
        if isinstance(m, FillerIntro):
            return self._infer_filler_intro(m, lo, hi)
        if isinstance(m, FillerElim):
            return self._infer_filler_elim(m, lo, hi)
        if isinstance(m, IsoApp):
            return self._infer_iso_app(m, lo, hi)
        if isinstance(m, Composite):
            return self._infer_composite(m, lo, hi)
        raise CheckError(f"unknown proterm node {type(m).__name__}")

    def _try_partitions(
        self, parts: Sequence[Proterm], lo: int, hi: int
    ) -> list[list[tuple[int, int]]]:
        ps = sb.partitions(parts, lo, hi, self.pos)
        if not ps:
            raise CheckError(
                f"no consistent hypothesis split over [{lo},{hi})"
            )
        return ps

    def _infer_transapp(self, m: TransApp, lo: int, hi: int) -> Protype:
        spec = self.spec
        tsym = spec.sig.transformations.get(m.sym)
        if tsym is None:
            raise CheckError(f"undeclared transformation {m.sym!r}")
        n = len(tsym.domain)
        if len(m.args) != n or len(m.groups) != n + 1:
            raise CheckError(
                f"{m.sym} expects {n} arguments and {n + 1} term groups"
            )
        candidates = (
            self._try_partitions(m.args, lo, hi) if m.args else [[]]
        )
        last_err: Optional[CheckError] = None
        for part in candidates:
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            if not part and lo != hi:
                break
            try:
                subs: list[TermSubst] = []
                for j, b in enumerate(bounds):
                    target = tsym.contexts[j]
                    group = m.groups[j]
                    if len(group) != len(target):
                        raise CheckError(
                            f"{m.sym}: term group {j} arity mismatch"
                        )
                    gamma = self.p.slots[b]
                    for t, (_, ty) in zip(group, target):
                        v = check_term(spec, gamma, t, ty)
                        if not v.ok:
                            raise CheckError(f"{m.sym}: {v.reason}")
                    subs.append(TermSubst(target, group))
                for i, (s, e) in enumerate(part):
                    want = sb.subst_protype(tsym.domain[i], subs[i], subs[i + 1])
                    got = self.infer(m.args[i], s, e)
                    v = protype_equal(
                        spec, self.p.slots[s], self.p.slots[e], got, want, self.cfg
                    )
                    if not v.ok:
                        raise CheckError(
                            f"{m.sym}: argument {i + 1} has {got}, expected {want}"
                        )
                return sb.subst_protype(tsym.codomain, subs[0], subs[-1])
            except CheckError as e:
                last_err = e
                continue
        if last_err is not None:
            raise last_err
        raise CheckError(f"{m.sym}: nullary application over a nonempty span")

    def _infer_tensor_intro(self, m: TensorIntro, lo: int, hi: int) -> Protype:
        for (ls, le), (rs, re) in self._try_partitions([m.left, m.right], lo, hi):
            mid_ty = _singleton_type(self.p.slots[le])
            if mid_ty is None:
                continue
            try:
                a = self.infer(m.left, ls, le)
                b = self.infer(m.right, rs, re)
            except CheckError:
                continue
            name = self.p.slots[le].names()[0]
            return Tensor(name, mid_ty, a, b)
        raise CheckError("tensor introduction: no singleton joint slot fits")

    def _infer_tensor_elim(self, m: TensorElim, lo: int, hi: int) -> Protype:
        i = self.pos.get(m.hyp)
        if i is None or not (lo <= i < hi):
            raise CheckError(f"unknown or out-of-span hypothesis {m.hyp!r}")
        _, pt = self.p.hyps[i]
        if not isinstance(pt, Tensor):
            raise CheckError(f"hypothesis {m.hyp!r} is not a tensor")
        body_p = sb.split_tensor_slots(self.p, i)
        body_p = Procontext(
            body_p.slots,
            body_p.hyps[:i]
            + ((m.left, pt.left), (m.right, pt.right))
            + body_p.hyps[i + 2 :],
        )
        sub = _Infer(self.spec, body_p, self.cfg)
        return sub.infer(m.body, lo, hi + 1)

    def _infer_ide_elim(self, m: IdeElim, lo: int, hi: int) -> Protype:
        i = self.pos.get(m.hyp)
        if i is None or not (lo <= i < hi):
            raise CheckError(f"unknown or out-of-span hypothesis {m.hyp!r}")
        body_p, _ = sb.merge_ide_slots(self.p, i)
        sub = _Infer(self.spec, body_p, self.cfg)
        return sub.infer(m.body, lo, hi - 1)

    def _infer_filler_intro(self, m: FillerIntro, lo: int, hi: int) -> Protype:
        sliced = self.p.sub(lo, hi)
        v = check_protype(
            self.spec, Context(((m.var or "x", m.ty),)), sliced.slots[0], m.along
        )
        if not v.ok:
            raise CheckError(f"filler source: {v.reason}")
        body_p = sb.filler_intro_body_proctx(sliced, m.var, m.ty, m.hyp, m.along)
        sub = _Infer(self.spec, body_p, self.cfg)
        tgt = sub.infer(m.body, 0, len(body_p.hyps))
        return Filler(m.var, m.ty, m.along, tgt)

    def _infer_filler_elim(self, m: FillerElim, lo: int, hi: int) -> Protype:
        last_err: Optional[CheckError] = None
        for (ls, le), (rs, re) in self._try_partitions([m.arg, m.fun], lo, hi):
            try:
                fun_ty = self.infer(m.fun, rs, re)
                if not isinstance(fun_ty, Filler):
                    raise CheckError(f"evaluation target is not a filler: {fun_ty}")
                bound_ty = _singleton_type(self.p.slots[ls])
                if bound_ty != fun_ty.ty:
                    raise CheckError(
                        "argument slot does not match the filler binder type"
                    )
                arg_ty = self.infer(m.arg, ls, le)
                v = protype_equal(
                    self.spec,
                    self.p.slots[ls],
                    self.p.slots[le],
                    arg_ty,
                    fun_ty.along,
                    self.cfg,
                )
                if not v.ok:
                    raise CheckError(
                        f"argument has {arg_ty}, filler expects {fun_ty.along}"
                    )
                return fun_ty.target
            except CheckError as e:
                last_err = e
        raise last_err if last_err else CheckError("filler evaluation failed")

    def _infer_iso_app(self, m: IsoApp, lo: int, hi: int) -> Protype:
        arg_ty = self.infer(m.arg, lo, hi)
        gamma, delta = self.frame(lo, hi)
        return apply_iso_protype(
            self.spec, m.iso, m.forward, arg_ty, gamma, delta, self.cfg, self, m.arg, lo, hi
        )

    def _infer_composite(self, m: Composite, lo: int, hi: int) -> Protype:
        spec = self.spec
        inner = m.inner
        parts = (
            self._try_partitions(list(m.bindings), lo, hi)
            if m.bindings
            else [[]]
        )
        last_err: Optional[CheckError] = None
        for part in parts:
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            try:
                subs: list[TermSubst] = []
                for j, b in enumerate(bounds):
                    target = inner.slots[j]
                    group = m.subst[j]
                    if len(group) != len(target):
                        raise CheckError("composite term group arity mismatch")
                    gamma = self.p.slots[b]
                    for t, (_, ty) in zip(group, target):
                        v = check_term(spec, gamma, t, ty)
                        if not v.ok:
                            raise CheckError(f"composite substitution: {v.reason}")
                    subs.append(TermSubst(target, group))
                for i, (s, e) in enumerate(part):
                    want = sb.subst_protype(inner.hyps[i][1], subs[i], subs[i + 1])
                    got = self.infer(m.bindings[i], s, e)
                    v = protype_equal(
                        spec, self.p.slots[s], self.p.slots[e], got, want, self.cfg
                    )
                    if not v.ok:
                        raise CheckError(
                            f"composite binding {i + 1} has {got}, expected {want}"
                        )
                body_infer = _Infer(spec, inner, self.cfg)
                tau = body_infer.infer(m.body, 0, len(inner.hyps))
                return sb.subst_protype(tau, subs[0], subs[-1])
            except CheckError as e:
                last_err = e
        raise last_err if last_err else CheckError("composite inference failed")


def apply_iso_protype(
    spec: Specification,
    w: IsoExpr,
    forward: bool,
    arg_ty: Protype,
    gamma: Context,
    delta: Context,
    cfg: RewriteConfig,
    inf: Optional[_Infer] = None,
    arg: Optional[Proterm] = None,
    lo: int = 0,
    hi: int = 0,
) -> Protype:
    """Result protype of applying an iso expression to a proterm of arg_ty."""
    if isinstance(w, InvIso):
        return apply_iso_protype(
            spec, w.inner, not forward, arg_ty, gamma, delta, cfg, inf, arg, lo, hi
        )
    if isinstance(w, IdIso):
        v = protype_equal(spec, gamma, delta, arg_ty, w.protype, cfg)
        if not v.ok:
            raise CheckError(f"identity iso at {w.protype} applied to {arg_ty}")
        return arg_ty
    if isinstance(w, CompIso):
        first = w.before if forward else w.after
        second = w.after if forward else w.before
        mid = apply_iso_protype(spec, first, forward, arg_ty, gamma, delta, cfg, inf, arg, lo, hi)
        return apply_iso_protype(spec, second, forward, mid, gamma, delta, cfg, inf, arg, lo, hi)
    if isinstance(w, (SymIso, ThmIso)):
        sides = iso_sides(spec, w)
        if sides is None:
            raise CheckError(f"unknown iso reference {w}")
        lc, rc, lhs, rhs = sides
        src, dst = (lhs, rhs) if forward else (rhs, lhs)
        match = protype_match(src, arg_ty, len(lc), len(rc))
        if match is None:
            raise CheckError(f"iso {w} does not apply at {arg_ty}")
        sl = _stores_to_subst(match[0], lc)
        sr = _stores_to_subst(match[1], rc)
        if sl is None or sr is None:
            raise CheckError(f"iso {w}: instance terms are underdetermined")
        return sb.subst_protype(dst, sl, sr)
    if isinstance(w, PairIso):
        if inf is None or arg is None:
            raise CheckError("pair iso needs an inference context")
        hyp = w.fwd_hyp if forward else w.bwd_hyp
        body = w.fwd if forward else w.bwd
        q = Procontext((gamma, delta), ((hyp, arg_ty),))
        sub = _Infer(spec, q, cfg)
        return sub.infer(body, 0, 1)
    raise CheckError(f"unknown iso node {type(w).__name__}")


def infer_proterm(
    spec: Specification,
    p: Procontext,
    m: Proterm,
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Protype:
    try:
        return _Infer(spec, p, cfg).infer(m, 0, len(p.hyps))
    except sb.SubstError as e:
        raise CheckError(str(e)) from e


def check_proterm(
    spec: Specification,
    p: Procontext,
    m: Proterm,
    beta: Protype,
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Verdict:
    v = check_procontext(spec, p)
    if not v.ok:
        return v
    gamma, delta = p.outer()
    v = check_protype(spec, gamma, delta, beta)
    if not v.ok:
        return fail(f"target protype: {v.reason}")
    try:
        got = infer_proterm(spec, p, m, cfg)
    except CheckError as e:
        return fail(str(e))
    conv = protype_equal(spec, gamma, delta, got, beta, cfg)
    if conv.status == "unknown":
        return unknown(f"conversion undecided between {got} and {beta}")
    if not conv.ok:
        return fail(f"proterm has protype {got}, expected {beta}: {conv.reason}")
    return OK
