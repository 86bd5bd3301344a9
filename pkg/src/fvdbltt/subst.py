"""Capture-avoiding substitution and prosubstitution.

Term substitution replaces positional variables, so no capture can
occur at the term level.  Substitution into proterms distributes over
every constructor except where a binder merges context slots
(``IdeElim``): a slot substitution that is not a variable renaming
leaves a ``Composite`` residual there, which is the composition-rule
form of the stuck instance.  Prosubstitution likewise β-reduces through
the binders when the relevant binding is a ``Refl``/``TensorIntro``/
provariable and otherwise leaves a ``Composite``.
"""

from __future__ import annotations

from typing import Optional, Sequence

from .syntax import (
    And,
    Composite,
    Context,
    Filler,
    FillerElim,
    FillerIntro,
    FunApp,
    Ide,
    IdeElim,
    IsoApp,
    IsoExpr,
    IdIso,
    CompIso,
    InvIso,
    PairIso,
    SymIso,
    ThmIso,
    Pair,
    PPair,
    PProj,
    ProfApp,
    Procontext,
    Proj,
    Protype,
    Proterm,
    ProVar,
    PUnit,
    Refl,
    Tensor,
    TensorElim,
    TensorIntro,
    Term,
    TermSubst,
    Top,
    TransApp,
    UnitTm,
    Var,
    identity_subst,
)


class SubstError(Exception):
    """Arity, scope, or frame mismatch during substitution."""


# ---------------------------------------------------------------------------
# terms


def subst_term(t: Term, s: TermSubst) -> Term:
    if isinstance(t, Var):
        if t.index >= len(s.components):
            raise SubstError(f"variable #{t.index} out of range for substitution")
        return s.components[t.index]
    if isinstance(t, UnitTm):
        return t
    if isinstance(t, Pair):
        return Pair(subst_term(t.fst, s), subst_term(t.snd, s))
    if isinstance(t, Proj):
        return Proj(t.side, subst_term(t.body, s))
    if isinstance(t, FunApp):
        return FunApp(t.sym, subst_term(t.arg, s))
    raise SubstError(f"unknown term {type(t).__name__}")


def compose_subst(outer: TermSubst, inner: TermSubst) -> TermSubst:
    """``inner ∘ outer``: apply outer to each component of inner.

    For ``Γ ⊢ outer / Δ`` and ``Δ ⊢ inner / Θ`` the result is
    ``Γ ⊢ inner[outer] / Θ``.
    """
    return TermSubst(inner.target, tuple(subst_term(t, outer) for t in inner.components))


# ---------------------------------------------------------------------------
# protypes


def _single_identity(var: str) -> TermSubst:
    # identity on a one-variable context; the type is irrelevant here
    return TermSubst(Context(((var or "x", _ANY_TYPE),)), (Var(0, var),))


class _AnyType:
    """Placeholder type for bound-slot identities (never compared)."""

    def __repr__(self) -> str:
        return "?"


_ANY_TYPE = _AnyType()  # type: ignore[assignment]


def subst_protype(pt: Protype, left: TermSubst, right: TermSubst) -> Protype:
    if isinstance(pt, Top):
        return pt
    if isinstance(pt, And):
        return And(subst_protype(pt.left, left, right), subst_protype(pt.right, left, right))
    if isinstance(pt, ProfApp):
        return ProfApp(pt.sym, subst_term(pt.left, left), subst_term(pt.right, right))
    if isinstance(pt, Ide):
        return Ide(pt.ty, subst_term(pt.left, left), subst_term(pt.right, right))
    if isinstance(pt, Tensor):
        mid = _single_identity(pt.var)
        return Tensor(
            pt.var,
            pt.ty,
            subst_protype(pt.left, left, mid),
            subst_protype(pt.right, mid, right),
        )
    if isinstance(pt, Filler):
        bound = _single_identity(pt.var)
        return Filler(
            pt.var,
            pt.ty,
            subst_protype(pt.along, bound, left),
            subst_protype(pt.target, bound, right),
        )
    raise SubstError(f"unknown protype {type(pt).__name__}")


# ---------------------------------------------------------------------------
# span partitioning

# A proterm used over a procontext slice occupies a hypothesis interval.
# Some nodes pin their interval exactly (provariables), some have zero
# width (refl, nullary applications), and the product fragment spans
# whatever the ambient judgment supplies.  Partitioning a span among the
# arguments of an application enumerates the consistent boundary
# choices; well-typed corpora make this essentially unique.


def used_interval(m: Proterm, hyp_pos: dict[str, int]) -> Optional[tuple[int, int]]:
    """Smallest hyp interval [i, j) the free provariables of m pin down."""
    lo: Optional[int] = None
    hi: Optional[int] = None

    def visit(x: Proterm, bound: frozenset[str]) -> None:
        nonlocal lo, hi
        if isinstance(x, ProVar):
            if x.name not in bound and x.name in hyp_pos:
                p = hyp_pos[x.name]
                lo = p if lo is None else min(lo, p)
                hi = p + 1 if hi is None else max(hi, p + 1)
        elif isinstance(x, TransApp):
            for a in x.args:
                visit(a, bound)
        elif isinstance(x, (PPair, TensorIntro)):
            visit(x.fst if isinstance(x, PPair) else x.left, bound)
            visit(x.snd if isinstance(x, PPair) else x.right, bound)
        elif isinstance(x, PProj):
            visit(x.body, bound)
        elif isinstance(x, IdeElim):
            if x.hyp not in bound and x.hyp in hyp_pos:
                visit(ProVar(x.hyp), bound)
            visit(x.body, bound)
        elif isinstance(x, TensorElim):
            if x.hyp not in bound and x.hyp in hyp_pos:
                visit(ProVar(x.hyp), bound)
            visit(x.body, bound | {x.left, x.right})
        elif isinstance(x, FillerIntro):
            visit(x.body, bound | {x.hyp})
        elif isinstance(x, FillerElim):
            visit(x.arg, bound)
            visit(x.fun, bound)
        elif isinstance(x, IsoApp):
            visit(x.arg, bound)
        elif isinstance(x, Composite):
            for b in x.bindings:
                visit(b, bound)

    visit(m, frozenset())
    if lo is None:
        return None
    return lo, hi  # type: ignore[return-value]


def rigid_width(m: Proterm) -> Optional[int]:
    """Exact hypothesis width when the node's shape determines it."""
    if isinstance(m, ProVar):
        return 1
    if isinstance(m, Refl):
        return 0
    if isinstance(m, TransApp):
        widths = [rigid_width(a) for a in m.args]
        if any(w is None for w in widths):
            return None
        return sum(widths)  # type: ignore[arg-type]
    if isinstance(m, (TensorIntro, FillerElim)):
        l = rigid_width(m.left if isinstance(m, TensorIntro) else m.arg)
        r = rigid_width(m.right if isinstance(m, TensorIntro) else m.fun)
        if l is None or r is None:
            return None
        return l + r
    if isinstance(m, IdeElim):
        w = rigid_width(m.body)
        return None if w is None else w + 1
    if isinstance(m, TensorElim):
        w = rigid_width(m.body)
        return None if w is None else w - 1
    if isinstance(m, FillerIntro):
        w = rigid_width(m.body)
        return None if w is None else w - 1
    if isinstance(m, IsoApp):
        return rigid_width(m.arg)
    if isinstance(m, PProj):
        return rigid_width(m.body)
    if isinstance(m, Composite):
        widths = [rigid_width(b) for b in m.bindings]
        if any(w is None for w in widths):
            return None
        return sum(widths)  # type: ignore[arg-type]
    return None  # product fragment: span supplied by the judgment


def partitions(
    parts: Sequence[Proterm],
    lo: int,
    hi: int,
    hyp_pos: dict[str, int],
) -> list[list[tuple[int, int]]]:
    """All boundary choices lo=k0<=…<=kn=hi consistent with the parts."""
    n = len(parts)
    infos = []
    for p in parts:
        infos.append((rigid_width(p), used_interval(p, hyp_pos)))
    out: list[list[tuple[int, int]]] = []

    def go(i: int, start: int, acc: list[tuple[int, int]]) -> None:
        if i == n:
            if start == hi:
                out.append(list(acc))
            return
        width, used = infos[i]
        if width is not None:
            ends = [start + width]
        else:
            min_end = start if used is None else max(start, used[1])
            ends = range(min_end, hi + 1)
        for end in ends:
            if end > hi:
                continue
            if used is not None and not (start <= used[0] and used[1] <= end):
                continue
            acc.append((start, end))
            go(i + 1, end, acc)
            acc.pop()

    go(0, lo, [])
    return out


def unique_partition(
    parts: Sequence[Proterm], lo: int, hi: int, hyp_pos: dict[str, int]
) -> list[tuple[int, int]]:
    ps = partitions(parts, lo, hi, hyp_pos)
    if not ps:
        raise SubstError(f"no consistent span partition over [{lo},{hi}]")
    return ps[0]


def hyp_positions(p: Procontext) -> dict[str, int]:
    return {n: i for i, (n, _) in enumerate(p.hyps)}


# ---------------------------------------------------------------------------
# procontext surgery


def split_tensor_slots(p: Procontext, i: int) -> Procontext:
    """Body procontext of a TensorElim at hypothesis i."""
    name, pt = p.hyps[i]
    if not isinstance(pt, Tensor):
        raise SubstError(f"hypothesis {name} is not a tensor")
    mid = Context(((pt.var or "x", pt.ty),))
    return Procontext(
        p.slots[: i + 1] + (mid,) + p.slots[i + 1 :],
        p.hyps[:i] + (("", pt.left), ("", pt.right)) + p.hyps[i + 1 :],
    )


def merge_ide_slots(p: Procontext, i: int) -> tuple[Procontext, "TypeExpr"]:
    """Body procontext of an IdeElim at hypothesis i (slots i, i+1 merge)."""
    name, pt = p.hyps[i]
    if not isinstance(pt, Ide):
        raise SubstError(f"hypothesis {name} is not a path protype")
    for k in (i, i + 1):
        if len(p.slots[k]) != 1:
            raise SubstError("path elimination needs singleton slots")
    if not (
        isinstance(pt.left, Var)
        and pt.left.index == 0
        and isinstance(pt.right, Var)
        and pt.right.index == 0
    ):
        raise SubstError("path elimination needs a generic hypothesis")
    merged = p.slots[i]
    return (
        Procontext(
            p.slots[:i] + (merged,) + p.slots[i + 2 :],
            p.hyps[:i] + p.hyps[i + 1 :],
        ),
        pt.ty,
    )


def filler_intro_body_proctx(
    p: Procontext, var: str, ty: "TypeExpr", hyp: str, along: Protype
) -> Procontext:
    bound = Context(((var or "x", ty),))
    return Procontext((bound,) + p.slots, ((hyp, along),) + p.hyps)


def concat_proctx(parts: Sequence[Procontext]) -> Procontext:
    if not parts:
        raise SubstError("cannot concatenate zero procontexts")
    slots = list(parts[0].slots)
    hyps = list(parts[0].hyps)
    for q in parts[1:]:
        if q.slots[0] != slots[-1]:
            raise SubstError("procontext join mismatch")
        slots.extend(q.slots[1:])
        hyps.extend(q.hyps)
    return Procontext(tuple(slots), tuple(hyps))


def freshen(name: str, avoid: set[str]) -> str:
    base = name or "a"
    out = base
    while out in avoid:
        out += "'"
    return out


def rename_provars(m: Proterm, mapping: dict[str, str]) -> Proterm:
    """Rename free provariables; binders shadow."""
    if not mapping:
        return m
    if isinstance(m, ProVar):
        return ProVar(mapping.get(m.name, m.name))
    if isinstance(m, TransApp):
        return TransApp(m.sym, m.groups, tuple(rename_provars(a, mapping) for a in m.args))
    if isinstance(m, PPair):
        return PPair(rename_provars(m.fst, mapping), rename_provars(m.snd, mapping))
    if isinstance(m, PProj):
        return PProj(m.side, rename_provars(m.body, mapping))
    if isinstance(m, (PUnit, Refl)):
        return m
    if isinstance(m, IdeElim):
        return IdeElim(mapping.get(m.hyp, m.hyp), rename_provars(m.body, mapping), m.merged)
    if isinstance(m, TensorIntro):
        return TensorIntro(rename_provars(m.left, mapping), rename_provars(m.right, mapping))
    if isinstance(m, TensorElim):
        inner = {k: v for k, v in mapping.items() if k not in (m.left, m.right)}
        return TensorElim(
            mapping.get(m.hyp, m.hyp), m.left, m.var, m.right, rename_provars(m.body, inner)
        )
    if isinstance(m, FillerIntro):
        inner = {k: v for k, v in mapping.items() if k != m.hyp}
        return FillerIntro(m.var, m.ty, m.hyp, m.along, rename_provars(m.body, inner))
    if isinstance(m, FillerElim):
        return FillerElim(rename_provars(m.arg, mapping), rename_provars(m.fun, mapping))
    if isinstance(m, IsoApp):
        return IsoApp(m.iso, m.forward, rename_provars(m.arg, mapping))
    if isinstance(m, Composite):
        return Composite(
            m.inner, m.body, m.subst, tuple(rename_provars(b, mapping) for b in m.bindings)
        )
    raise SubstError(f"rename: unknown proterm {type(m).__name__}")


# ---------------------------------------------------------------------------
# substitution into proterms


def _is_singleton_renaming(s: TermSubst) -> bool:
    return (
        len(s.components) == 1
        and isinstance(s.components[0], Var)
        and s.components[0].index == 0
    )


def _binder_slot_pushable(s: TermSubst, source: Context) -> bool:
    """A binder slot absorbs a substitution only when it is the identity
    up to the variable hint: singleton to singleton, index 0."""
    return _is_singleton_renaming(s) and len(source) == 1


def subst_proterm(
    p: Procontext,
    m: Proterm,
    subs: Sequence[TermSubst],
    sources: Optional[Sequence[Context]] = None,
) -> Proterm:
    """Apply one term substitution per procontext slot.

    ``subs[k]`` targets ``p.slots[k]`` with components living in
    ``sources[k]``; the result lives over the procontext with those
    source slots.  Sources are needed to build composition residuals at
    binder nodes whose slots cannot absorb a general substitution.
    """
    if len(subs) != len(p.slots):
        raise SubstError(
            f"need {len(p.slots)} slot substitutions, got {len(subs)}"
        )
    if sources is None:
        sources = [s.target for s in subs]  # only sound for renamings
    return _subst_pt(p, m, list(subs), list(sources), 0, len(p.hyps))


def _subst_pt(
    p: Procontext,
    m: Proterm,
    subs: list[TermSubst],
    sources: list[Context],
    lo: int,
    hi: int,
) -> Proterm:
    pos = hyp_positions(p)
    if isinstance(m, ProVar):
        return m
    if isinstance(m, PUnit):
        return m
    if isinstance(m, PPair):
        return PPair(_subst_pt(p, m.fst, subs, sources, lo, hi), _subst_pt(p, m.snd, subs, sources, lo, hi))
    if isinstance(m, PProj):
        return PProj(m.side, _subst_pt(p, m.body, subs, sources, lo, hi))
    if isinstance(m, Refl):
        return Refl(subst_term(m.term, subs[lo]))
    if isinstance(m, TransApp):
        if m.args:
            part = unique_partition(m.args, lo, hi, pos)
            bounds = [part[0][0]] + [e for (_, e) in part]
        else:
            part = []
            bounds = [lo]
        groups = tuple(
            tuple(subst_term(t, subs[b]) for t in g)
            for g, b in zip(m.groups, bounds)
        )
        args = tuple(
            _subst_pt(p, a, subs, sources, s, e) for a, (s, e) in zip(m.args, part)
        )
        return TransApp(m.sym, groups, args)
    if isinstance(m, TensorIntro):
        (ls, le), (rs, re) = unique_partition([m.left, m.right], lo, hi, pos)
        # the joint slot is the composite's binder: only renamings push
        if not _binder_slot_pushable(subs[le], sources[le]):
            return _subst_stuck(p, m, subs, sources, lo, hi, {le})
        return TensorIntro(
            _subst_pt(p, m.left, subs, sources, ls, le), _subst_pt(p, m.right, subs, sources, rs, re)
        )
    if isinstance(m, FillerElim):
        (ls, le), (rs, re) = unique_partition([m.arg, m.fun], lo, hi, pos)
        # the argument's left boundary is the filler binder: renamings only
        if not _binder_slot_pushable(subs[ls], sources[ls]):
            return _subst_stuck(p, m, subs, sources, lo, hi, {ls})
        return FillerElim(
            _subst_pt(p, m.arg, subs, sources, ls, le), _subst_pt(p, m.fun, subs, sources, rs, re)
        )
    if isinstance(m, TensorElim):
        i = pos.get(m.hyp)
        if i is None:
            raise SubstError(f"unknown hypothesis {m.hyp}")
        body_p = split_tensor_slots(p, i)
        body_p = Procontext(
            body_p.slots,
            body_p.hyps[:i] + ((m.left, body_p.hyps[i][1]), (m.right, body_p.hyps[i + 1][1])) + body_p.hyps[i + 2 :],
        )
        mid_id = identity_subst(body_p.slots[i + 1])
        body_subs = subs[: i + 1] + [mid_id] + subs[i + 1 :]
        body_sources = sources[: i + 1] + [body_p.slots[i + 1]] + sources[i + 1 :]
        body = _subst_pt(body_p, m.body, body_subs, body_sources, lo, hi + 1)
        return TensorElim(m.hyp, m.left, m.var, m.right, body)
    if isinstance(m, FillerIntro):
        sliced = p.sub(lo, hi)
        body_p = filler_intro_body_proctx(sliced, m.var, m.ty, m.hyp, m.along)
        bound_id = identity_subst(body_p.slots[0])
        body_subs = [bound_id] + subs[lo : hi + 1]
        body_sources = [body_p.slots[0]] + sources[lo : hi + 1]
        body = _subst_pt(body_p, m.body, body_subs, body_sources, 0, len(body_p.hyps))
        along = subst_protype(m.along, bound_id, subs[lo])
        return FillerIntro(m.var, m.ty, m.hyp, along, body)
    if isinstance(m, IdeElim):
        i = pos.get(m.hyp)
        if i is None:
            raise SubstError(f"unknown hypothesis {m.hyp}")
        si, sj = subs[i], subs[i + 1]
        if _binder_slot_pushable(si, sources[i]) and _binder_slot_pushable(
            sj, sources[i + 1]
        ):
            try:
                body_p, _ = merge_ide_slots(p, i)
            except SubstError:
                return _subst_stuck(p, m, subs, sources, lo, hi, {i, i + 1})
            body_subs = subs[:i] + [si] + subs[i + 2 :]
            body_sources = sources[:i] + [sources[i]] + sources[i + 2 :]
            body = _subst_pt(body_p, m.body, body_subs, body_sources, lo, hi - 1)
            return IdeElim(m.hyp, body, m.merged)
        # slot merge cannot absorb a general substitution: leave the
        # composition-rule residual at this node
        return _subst_stuck(p, m, subs, sources, lo, hi, {i, i + 1})
    if isinstance(m, IsoApp):
        inner = _subst_iso(m.iso, subs[lo], subs[hi])
        return IsoApp(inner, m.forward, _subst_pt(p, m.arg, subs, sources, lo, hi))
    if isinstance(m, Composite):
        part = unique_partition(list(m.bindings), lo, hi, pos) if m.bindings else []
        if m.bindings:
            bounds = [part[0][0]] + [e for (_, e) in part]
        else:
            bounds = [lo]
        new_subst = tuple(
            tuple(subst_term(t, subs[b]) for t in g)
            for g, b in zip(m.subst, bounds)
        )
        bindings = tuple(
            _subst_pt(p, b, subs, sources, s, e) for b, (s, e) in zip(m.bindings, part)
        )
        return Composite(m.inner, m.body, new_subst, bindings)
    raise SubstError(f"subst: unknown proterm {type(m).__name__}")


def _subst_stuck(
    p: Procontext,
    m: Proterm,
    subs: list[TermSubst],
    sources: list[Context],
    lo: int,
    hi: int,
    critical: set[int],
) -> Composite:
    """Composition residual at a binder whose slots cannot absorb the
    substitution.

    Everything outside the critical slots pushes inside (keeping the
    residual canonical, so iterated substitution composes its groups);
    the wrapper carries the critical substitutions and identities
    elsewhere.
    """
    if any(len(p.slots[j]) != 1 for j in critical):
        # the node itself is malformed at its binder slot; wrap whole
        sliced = p.sub(lo, hi)
        return Composite(
            sliced,
            m,
            tuple(tuple(s.components) for s in subs[lo : hi + 1]),
            tuple(ProVar(n) for n, _ in sliced.hyps),
        )
    inner_subs: list[TermSubst] = []
    inner_sources: list[Context] = []
    for j in range(len(p.slots)):
        if j in critical:
            inner_subs.append(identity_subst(p.slots[j]))
            inner_sources.append(p.slots[j])
        else:
            inner_subs.append(subs[j])
            inner_sources.append(sources[j])
    body = _subst_pt(p, m, inner_subs, inner_sources, lo, hi)
    inner = Procontext(
        tuple(inner_sources[lo : hi + 1]),
        tuple(
            (name, subst_protype(pt, inner_subs[i], inner_subs[i + 1]))
            for i, (name, pt) in enumerate(p.hyps[lo:hi], start=lo)
        ),
    )
    groups = tuple(
        tuple(subs[j].components)
        if j in critical
        else tuple(
            Var(k, n) for k, (n, _) in enumerate(inner_sources[j].entries)
        )
        for j in range(lo, hi + 1)
    )
    return Composite(inner, body, groups, tuple(ProVar(n) for n, _ in inner.hyps))


def _subst_iso(w: IsoExpr, left: TermSubst, right: TermSubst) -> IsoExpr:
    if isinstance(w, (SymIso, ThmIso)):
        return w  # generic; the instance is read off the argument
    if isinstance(w, IdIso):
        return IdIso(subst_protype(w.protype, left, right))
    if isinstance(w, CompIso):
        return CompIso(_subst_iso(w.after, left, right), _subst_iso(w.before, left, right))
    if isinstance(w, InvIso):
        return InvIso(_subst_iso(w.inner, left, right))
    if isinstance(w, PairIso):
        fp = Procontext((left.target, right.target), ((w.fwd_hyp, Top()),))
        bp = Procontext((left.target, right.target), ((w.bwd_hyp, Top()),))
        return PairIso(
            w.fwd_hyp,
            _subst_pt(fp, w.fwd, [left, right], 0, 1),
            w.bwd_hyp,
            _subst_pt(bp, w.bwd, [left, right], 0, 1),
        )
    raise SubstError(f"unknown iso {type(w).__name__}")


# ---------------------------------------------------------------------------
# prosubstitution


def prosubst(
    p: Procontext,
    m: Proterm,
    bindings: Sequence[tuple[Procontext, Proterm]],
) -> tuple[Procontext, Proterm]:
    """Substitute a proterm for each hypothesis of ``p``.

    ``bindings[i]`` supplies the replacement for hypothesis i together
    with its own procontext, whose outer contexts must match the
    hypothesis frame.  Returns the concatenated procontext and the
    substituted proterm.
    """
    if len(bindings) != len(p.hyps):
        raise SubstError(
            f"need {len(p.hyps)} bindings, got {len(bindings)}"
        )
    # disjointness of hypothesis names across bindings
    seen: set[str] = set()
    fixed: list[tuple[Procontext, Proterm]] = []
    for bp, bm in bindings:
        ren: dict[str, str] = {}
        new_hyps = []
        for n, pt in bp.hyps:
            n2 = freshen(n, seen)
            seen.add(n2)
            if n2 != n:
                ren[n] = n2
            new_hyps.append((n2, pt))
        if ren:
            bp = Procontext(bp.slots, tuple(new_hyps))
            bm = rename_provars(bm, ren)
        fixed.append((bp, bm))
    if fixed:
        new_p = concat_proctx([bp for bp, _ in fixed])
    else:
        new_p = p
    out = _prosubst(p, m, fixed, 0, len(p.hyps))
    return new_p, out


def _identity_binding(p: Procontext, i: int) -> tuple[Procontext, Proterm]:
    name, pt = p.hyps[i]
    return (
        Procontext((p.slots[i], p.slots[i + 1]), ((name, pt),)),
        ProVar(name),
    )


def _prosubst(
    p: Procontext,
    m: Proterm,
    bindings: list[tuple[Procontext, Proterm]],
    lo: int,
    hi: int,
) -> Proterm:
    pos = hyp_positions(p)
    if isinstance(m, ProVar):
        i = pos.get(m.name)
        if i is None or not (lo <= i < hi):
            raise SubstError(f"provariable {m.name} outside span")
        return bindings[i][1]
    if isinstance(m, (PUnit, Refl)):
        return m
    if isinstance(m, PPair):
        return PPair(
            _prosubst(p, m.fst, bindings, lo, hi), _prosubst(p, m.snd, bindings, lo, hi)
        )
    if isinstance(m, PProj):
        return PProj(m.side, _prosubst(p, m.body, bindings, lo, hi))
    if isinstance(m, TransApp):
        part = unique_partition(m.args, lo, hi, pos) if m.args else []
        args = tuple(
            _prosubst(p, a, bindings, s, e) for a, (s, e) in zip(m.args, part)
        )
        return TransApp(m.sym, m.groups, args)
    if isinstance(m, TensorIntro):
        (ls, le), (rs, re) = unique_partition([m.left, m.right], lo, hi, pos)
        return TensorIntro(
            _prosubst(p, m.left, bindings, ls, le),
            _prosubst(p, m.right, bindings, rs, re),
        )
    if isinstance(m, FillerElim):
        (ls, le), (rs, re) = unique_partition([m.arg, m.fun], lo, hi, pos)
        return FillerElim(
            _prosubst(p, m.arg, bindings, ls, le),
            _prosubst(p, m.fun, bindings, rs, re),
        )
    if isinstance(m, IsoApp):
        return IsoApp(m.iso, m.forward, _prosubst(p, m.arg, bindings, lo, hi))
    if isinstance(m, FillerIntro):
        sliced = p.sub(lo, hi)
        avoid = set()
        for bp, _ in bindings[lo:hi]:
            avoid.update(bp.hyp_names())
        hyp = freshen(m.hyp, avoid)
        body = m.body if hyp == m.hyp else rename_provars(m.body, {m.hyp: hyp})
        body_p = filler_intro_body_proctx(sliced, m.var, m.ty, hyp, m.along)
        body_bindings = [_identity_binding(body_p, 0)] + bindings[lo:hi]
        new_body = _prosubst(body_p, body, body_bindings, 0, len(body_p.hyps))
        return FillerIntro(m.var, m.ty, hyp, m.along, new_body)
    if isinstance(m, TensorElim):
        i = pos.get(m.hyp)
        if i is None:
            raise SubstError(f"unknown hypothesis {m.hyp}")
        bp, bm = bindings[i]
        body_p = split_tensor_slots(p, i)
        avoid = set()
        for q, _ in bindings[lo:hi]:
            avoid.update(q.hyp_names())
        lname = freshen(m.left, avoid)
        avoid.add(lname)
        rname = freshen(m.right, avoid)
        body = m.body
        ren = {}
        if lname != m.left:
            ren[m.left] = lname
        if rname != m.right:
            ren[m.right] = rname
        if ren:
            body = rename_provars(body, ren)
        body_p = Procontext(
            body_p.slots,
            body_p.hyps[:i]
            + ((lname, body_p.hyps[i][1]), (rname, body_p.hyps[i + 1][1]))
            + body_p.hyps[i + 2 :],
        )
        if isinstance(bm, TensorIntro):
            bpos = hyp_positions(bp)
            (ls, le), (rs, re) = unique_partition(
                [bm.left, bm.right], 0, len(bp.hyps), bpos
            )
            lb = (bp.sub(ls, le), bm.left)
            rb = (bp.sub(rs, re), bm.right)
            body_bindings = bindings[:i] + [lb, rb] + bindings[i + 1 :]
            return _prosubst(body_p, body, body_bindings, lo, hi + 1)
        if isinstance(bm, ProVar) and len(bp.hyps) == 1:
            body_bindings = (
                bindings[:i]
                + [_rebound(body_p, i, lname), _rebound(body_p, i + 1, rname)]
                + bindings[i + 1 :]
            )
            inner = _prosubst(body_p, body, body_bindings, lo, hi + 1)
            return TensorElim(bp.hyps[0][0], lname, m.var, rname, inner)
        return _stuck_composite(p, m, bindings, lo, hi, i)
    if isinstance(m, IdeElim):
        i = pos.get(m.hyp)
        if i is None:
            raise SubstError(f"unknown hypothesis {m.hyp}")
        bp, bm = bindings[i]
        if isinstance(bm, Refl):
            try:
                body_p, ty = merge_ide_slots(p, i)
            except SubstError:
                return _stuck_composite(p, m, bindings, lo, hi, i)
            merged_sub = TermSubst(body_p.slots[i], (bm.term,))
            subs = [identity_subst(c) for c in body_p.slots]
            srcs = list(body_p.slots)
            subs[i] = merged_sub
            srcs[i] = bp.slots[0]
            body = subst_proterm(body_p, m.body, subs, srcs)
            new_body_p = Procontext(
                body_p.slots[:i] + (bp.slots[0],) + body_p.slots[i + 1 :],
                body_p.hyps,
            )
            body_bindings = bindings[:i] + bindings[i + 1 :]
            return _prosubst(new_body_p, body, body_bindings, lo, hi - 1)
        if isinstance(bm, ProVar) and len(bp.hyps) == 1:
            try:
                body_p, _ = merge_ide_slots(p, i)
            except SubstError:
                return _stuck_composite(p, m, bindings, lo, hi, i)
            body_bindings = bindings[:i] + bindings[i + 1 :]
            inner = _prosubst(body_p, m.body, body_bindings, lo, hi - 1)
            return IdeElim(bp.hyps[0][0], inner, m.merged)
        return _stuck_composite(p, m, bindings, lo, hi, i)
    if isinstance(m, Composite):
        part = unique_partition(list(m.bindings), lo, hi, pos) if m.bindings else []
        new_bindings = tuple(
            _prosubst(p, b, bindings, s, e)
            for b, (s, e) in zip(m.bindings, part)
        )
        return Composite(m.inner, m.body, m.subst, new_bindings)
    raise SubstError(f"prosubst: unknown proterm {type(m).__name__}")


def _rebound(body_p: Procontext, i: int, name: str) -> tuple[Procontext, Proterm]:
    _, pt = body_p.hyps[i]
    return (
        Procontext((body_p.slots[i], body_p.slots[i + 1]), ((name, pt),)),
        ProVar(name),
    )


def _stuck_composite(
    p: Procontext,
    m: Proterm,
    bindings: list[tuple[Procontext, Proterm]],
    lo: int,
    hi: int,
    critical: int,
) -> Composite:
    """Composition residual at a binder whose hypothesis binding cannot
    reduce.

    All other bindings push into the body (keeping the residual
    canonical under iterated prosubstitution); the wrapper carries the
    critical binding and identities for the hypotheses the pushed
    bindings introduced.
    """
    inner_bindings: list[tuple[Procontext, Proterm]] = []
    for j in range(lo, hi):
        if j == critical:
            inner_bindings.append(_identity_binding(p, j))
        else:
            inner_bindings.append(bindings[j])
    body = _prosubst(p, m, _pad_bindings(p, bindings, inner_bindings, lo, hi), lo, hi)
    inner = concat_proctx([q for q, _ in inner_bindings])
    wrapper: list[Proterm] = []
    for j in range(lo, hi):
        if j == critical:
            wrapper.append(bindings[j][1])
        else:
            for name, _ in inner_bindings[j - lo][0].hyps:
                wrapper.append(ProVar(name))
    return Composite(
        inner,
        body,
        tuple(
            tuple(Var(k, n) for k, (n, _) in enumerate(c.entries))
            for c in inner.slots
        ),
        tuple(wrapper),
    )


def _pad_bindings(p, bindings, inner, lo, hi):
    """Full-length binding list aligned with p's hypotheses."""
    out = list(bindings)
    for j in range(lo, hi):
        out[j] = inner[j - lo]
    return out
