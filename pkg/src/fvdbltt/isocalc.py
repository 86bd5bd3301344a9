"""Protype isomorphism layer.

Iso judgments are elaborated into forward/backward proterms by the
translation clauses (identity to the bare provariable, composition to
nested applications, pairing to its components, symbols to symbol
applications).  Checking an iso verifies both elaborations and both
round-trip equalities.  The unfolding translation turns a
specification with isomorphism symbols into a plain one with a pair of
transformation symbols and two inverse-law axioms per isomorphism
symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

from . import subst as sb
from .checker import (
    DEFAULT_CONFIG,
    OK,
    RewriteConfig,
    Verdict,
    check_proterm,
    check_protype,
    fail,
)
from .rewrite import check_proterm_eq, normalize_proterm
from .syntax import (
    BaseT,
    Composite,
    CompIso,
    Context,
    Filler,
    FillerElim,
    FillerIntro,
    IdeElim,
    IdIso,
    InvIso,
    IsoApp,
    IsoExpr,
    PairIso,
    PPair,
    PProj,
    Procontext,
    ProfApp,
    ProtermAxiom,
    Protype,
    Proterm,
    ProVar,
    PUnit,
    Refl,
    Specification,
    SymIso,
    TensorElim,
    TensorIntro,
    ThmIso,
    TransApp,
    TransSym,
    Var,
    alpha_equal,
)


@dataclass(frozen=True)
class IsoJudgment:
    left_ctx: Context
    right_ctx: Context
    lhs: Protype
    rhs: Protype
    witness: IsoExpr
    name: str = ""


def elaborate_iso(
    spec: Specification,
    j: IsoJudgment,
    forward: bool,
    hyp: str = "a",
    cfg: RewriteConfig = DEFAULT_CONFIG,
) -> Proterm:
    """The unary globular proterm realizing one direction of the iso."""
    src = j.lhs if forward else j.rhs
    dst = j.rhs if forward else j.lhs
    p = Procontext((j.left_ctx, j.right_ctx), ((hyp, src),))
    raw = IsoApp(j.witness, forward, ProVar(hyp))
    return normalize_proterm(spec, p, raw, dst, cfg)


def check_iso(
    spec: Specification,
    j: IsoJudgment,
    cfg: RewriteConfig = DEFAULT_CONFIG,
    extra_rules: Sequence[ProtermAxiom] = (),
) -> Verdict:
    """Both elaborations typecheck and both round-trips are identities."""
    for side, pt in (("left", j.lhs), ("right", j.rhs)):
        v = check_protype(spec, j.left_ctx, j.right_ctx, pt)
        if not v.ok:
            return fail(f"{side} protype: {v.reason}")
    fwd = elaborate_iso(spec, j, True, "a", cfg)
    bwd = elaborate_iso(spec, j, False, "b", cfg)
    p_fwd = Procontext((j.left_ctx, j.right_ctx), (("a", j.lhs),))
    p_bwd = Procontext((j.left_ctx, j.right_ctx), (("b", j.rhs),))
    v = check_proterm(spec, p_fwd, fwd, j.rhs, cfg)
    if not v.ok:
        return Verdict(v.status, f"forward direction: {v.reason}")
    v = check_proterm(spec, p_bwd, bwd, j.lhs, cfg)
    if not v.ok:
        return Verdict(v.status, f"backward direction: {v.reason}")
    try:
        _, around = sb.prosubst(p_bwd, bwd, [(p_fwd, fwd)])
        _, bround = sb.prosubst(p_fwd, fwd, [(p_bwd, bwd)])
    except sb.SubstError as e:
        return fail(f"round-trip composition: {e}")
    v = check_proterm_eq(spec, p_fwd, around, ProVar("a"), j.lhs, cfg, extra_rules)
    if not v.ok:
        return Verdict(v.status, f"backward∘forward is not the identity: {v.reason}")
    v = check_proterm_eq(spec, p_bwd, bround, ProVar("b"), j.rhs, cfg, extra_rules)
    if not v.ok:
        return Verdict(v.status, f"forward∘backward is not the identity: {v.reason}")
    return OK


def round_trip_rules(
    spec: Specification, j: IsoJudgment, cfg: RewriteConfig = DEFAULT_CONFIG
) -> list[ProtermAxiom]:
    """The two collapse rules of a proven iso, usable as derived rewrites."""
    fwd = elaborate_iso(spec, j, True, "a", cfg)
    bwd = elaborate_iso(spec, j, False, "b", cfg)
    p_fwd = Procontext((j.left_ctx, j.right_ctx), (("a", j.lhs),))
    p_bwd = Procontext((j.left_ctx, j.right_ctx), (("b", j.rhs),))
    out = []
    try:
        _, around = sb.prosubst(p_bwd, bwd, [(p_fwd, fwd)])
        around = normalize_proterm(spec, p_fwd, around, j.lhs, cfg)
        out.append(
            ProtermAxiom(p_fwd, around, ProVar("a"), j.lhs, f"{j.name}.rt1")
        )
        _, bround = sb.prosubst(p_fwd, fwd, [(p_bwd, bwd)])
        bround = normalize_proterm(spec, p_bwd, bround, j.rhs, cfg)
        out.append(
            ProtermAxiom(p_bwd, bround, ProVar("b"), j.rhs, f"{j.name}.rt2")
        )
    except sb.SubstError:
        pass
    return [r for r in out if not isinstance(r.lhs, ProVar)]


# ---------------------------------------------------------------------------
# the unfolding translation


def _phi(name: str) -> str:
    return f"phi_{name}"


def _psi(name: str) -> str:
    return f"psi_{name}"


def ufd_proterm(spec: Specification, p: Procontext, m: Proterm) -> Proterm:
    """Replace isomorphism-symbol applications by transformation symbols."""
    out = normalize_proterm(spec, p, m)  # expands idt/composition/pairing
    return _ufd_walk(spec, p, out, 0, len(p.hyps))


def _ufd_walk(
    spec: Specification, p: Procontext, m: Proterm, lo: int, hi: int
) -> Proterm:
    from .checker import CheckError, infer_proterm

    pos = sb.hyp_positions(p)
    if isinstance(m, (ProVar, PUnit, Refl)):
        return m
    if isinstance(m, PPair):
        return PPair(_ufd_walk(spec, p, m.fst, lo, hi), _ufd_walk(spec, p, m.snd, lo, hi))
    if isinstance(m, PProj):
        return PProj(m.side, _ufd_walk(spec, p, m.body, lo, hi))
    if isinstance(m, TransApp):
        parts = sb.partitions(m.args, lo, hi, pos) if m.args else [[]]
        part = parts[0] if parts else []
        args = tuple(
            _ufd_walk(spec, p, a, s, e) for a, (s, e) in zip(m.args, part)
        )
        return TransApp(m.sym, m.groups, args)
    if isinstance(m, TensorIntro):
        parts = sb.partitions([m.left, m.right], lo, hi, pos)
        (ls, le), (rs, re) = parts[0]
        return TensorIntro(
            _ufd_walk(spec, p, m.left, ls, le), _ufd_walk(spec, p, m.right, rs, re)
        )
    if isinstance(m, FillerElim):
        parts = sb.partitions([m.arg, m.fun], lo, hi, pos)
        (ls, le), (rs, re) = parts[0]
        return FillerElim(
            _ufd_walk(spec, p, m.arg, ls, le), _ufd_walk(spec, p, m.fun, rs, re)
        )
    if isinstance(m, TensorElim):
        i = pos[m.hyp]
        _, pt = p.hyps[i]
        body_p = sb.split_tensor_slots(p, i)
        body_p = Procontext(
            body_p.slots,
            body_p.hyps[:i]
            + ((m.left, body_p.hyps[i][1]), (m.right, body_p.hyps[i + 1][1]))
            + body_p.hyps[i + 2 :],
        )
        return TensorElim(
            m.hyp, m.left, m.var, m.right, _ufd_walk(spec, body_p, m.body, lo, hi + 1)
        )
    if isinstance(m, IdeElim):
        i = pos[m.hyp]
        body_p, _ = sb.merge_ide_slots(p, i)
        return IdeElim(m.hyp, _ufd_walk(spec, body_p, m.body, lo, hi - 1), m.merged)
    if isinstance(m, FillerIntro):
        sliced = p.sub(lo, hi)
        body_p = sb.filler_intro_body_proctx(sliced, m.var, m.ty, m.hyp, m.along)
        return FillerIntro(
            m.var,
            m.ty,
            m.hyp,
            m.along,
            _ufd_walk(spec, body_p, m.body, 0, len(body_p.hyps)),
        )
    if isinstance(m, IsoApp):
        arg = _ufd_walk(spec, p, m.arg, lo, hi)
        w = m.iso
        flip = False
        while isinstance(w, InvIso):
            w = w.inner
            flip = not flip
        forward = m.forward if not flip else not m.forward
        if isinstance(w, SymIso) and w.name in spec.isos:
            try:
                arg_ty = infer_proterm(spec, p.sub(lo, hi), arg)
            except CheckError as e:
                raise sb.SubstError(f"cannot translate iso application: {e}")
            if not isinstance(arg_ty, ProfApp):
                raise sb.SubstError(
                    f"iso symbol {w.name} applied off a symbol instance"
                )
            sym = _phi(w.name) if forward else _psi(w.name)
            return TransApp(sym, ((arg_ty.left,), (arg_ty.right,)), (arg,))
        return IsoApp(m.iso, m.forward, arg)
    if isinstance(m, Composite):
        parts = (
            sb.partitions(list(m.bindings), lo, hi, pos) if m.bindings else [[]]
        )
        part = parts[0] if parts else []
        bindings = tuple(
            _ufd_walk(spec, p, b, s, e) for b, (s, e) in zip(m.bindings, part)
        )
        body = _ufd_walk(spec, m.inner, m.body, 0, len(m.inner.hyps))
        return Composite(m.inner, body, m.subst, bindings)
    raise sb.SubstError(f"ufd: unknown proterm {type(m).__name__}")


def ufd_translate(spec: Specification) -> Specification:
    """Unfold isomorphism symbols into transformation-symbol pairs."""
    if not spec.isos:
        return spec
    transformations = dict(spec.sig.transformations)
    inverse_axioms: list[ProtermAxiom] = []
    for name, (lname, rname) in spec.isos.items():
        ls, rs = spec.sig.profunctors[lname]
        gamma = Context((("x", BaseT(ls)),))
        delta = Context((("y", BaseT(rs)),))
        rho = ProfApp(lname, Var(0, "x"), Var(0, "y"))
        omega = ProfApp(rname, Var(0, "x"), Var(0, "y"))
        transformations[_phi(name)] = TransSym((gamma, delta), (rho,), omega)
        transformations[_psi(name)] = TransSym((gamma, delta), (omega,), rho)
        xy = ((Var(0, "x"),), (Var(0, "y"),))
        p_rho = Procontext((gamma, delta), (("a", rho),))
        p_omega = Procontext((gamma, delta), (("b", omega),))
        inverse_axioms.append(
            ProtermAxiom(
                p_rho,
                TransApp(_psi(name), xy, (TransApp(_phi(name), xy, (ProVar("a"),)),)),
                ProVar("a"),
                rho,
                f"{name}.inv1",
            )
        )
        inverse_axioms.append(
            ProtermAxiom(
                p_omega,
                TransApp(_phi(name), xy, (TransApp(_psi(name), xy, (ProVar("b"),)),)),
                ProVar("b"),
                omega,
                f"{name}.inv2",
            )
        )
    new_sig = replace(spec.sig, transformations=transformations)
    new_axioms = []
    for ax in spec.proterm_axioms:
        new_axioms.append(
            ProtermAxiom(
                ax.proctx,
                ufd_proterm(spec, ax.proctx, ax.lhs),
                ufd_proterm(spec, ax.proctx, ax.rhs),
                ax.protype,
                ax.name,
            )
        )
    return Specification(
        new_sig,
        {},
        spec.term_axioms,
        tuple(new_axioms) + tuple(inverse_axioms),
    )
