"""File-level unfolding of isomorphism symbols.

Re-emits a declaration file with every isomorphism symbol replaced by
its pair of transformation symbols and the two inverse-law axioms; all
axiom sides and theorem witnesses have their isomorphism-symbol
applications rewritten to the corresponding symbol applications.
"""

from __future__ import annotations

from .checker import DEFAULT_CONFIG, RewriteConfig
from .isocalc import IsoJudgment, ufd_proterm, ufd_translate, _phi, _psi
from .parser import (
    print_ctx,
    print_proctx,
    print_protype,
    print_proterm,
    print_isoexpr,
    print_term,
    print_type,
)
from .session import Session, TheoremRecord
from .syntax import (
    CompIso,
    Context,
    IdIso,
    InvIso,
    IsoExpr,
    PairIso,
    ProfApp,
    Procontext,
    ProVar,
    Specification,
    SymIso,
    ThmIso,
    TransApp,
    TransSym,
)
from . import parser as ps


def _translate_isoexpr(
    spec: Specification,
    w: IsoExpr,
    gamma: Context,
    delta: Context,
    lhs,
    rhs,
) -> IsoExpr:
    if isinstance(w, SymIso) and w.name in spec.isos:
        if not isinstance(lhs, ProfApp) or not isinstance(rhs, ProfApp):
            raise ValueError(
                f"iso symbol {w.name} used away from a symbol instance"
            )
        groups = ((lhs.left,), (lhs.right,))
        p_f = Procontext((gamma, delta), (("a", lhs),))
        p_b = Procontext((gamma, delta), (("b", rhs),))
        return PairIso(
            "a",
            TransApp(_phi(w.name), groups, (ProVar("a"),)),
            "b",
            TransApp(_psi(w.name), groups, (ProVar("b"),)),
        )
    if isinstance(w, InvIso):
        return InvIso(_translate_isoexpr(spec, w.inner, gamma, delta, rhs, lhs))
    if isinstance(w, CompIso):
        # middles are preserved by the translation, sides suffice
        return CompIso(
            _translate_isoexpr(spec, w.after, gamma, delta, None, rhs),
            _translate_isoexpr(spec, w.before, gamma, delta, lhs, None),
        )
    if isinstance(w, PairIso):
        p_f = Procontext((gamma, delta), ((w.fwd_hyp, lhs),)) if lhs else None
        fwd = ufd_proterm(
            spec,
            Procontext((gamma, delta), ((w.fwd_hyp, lhs),)),
            w.fwd,
        ) if lhs is not None else w.fwd
        bwd = ufd_proterm(
            spec,
            Procontext((gamma, delta), ((w.bwd_hyp, rhs),)),
            w.bwd,
        ) if rhs is not None else w.bwd
        return PairIso(w.fwd_hyp, fwd, w.bwd_hyp, bwd)
    if isinstance(w, (IdIso, ThmIso)):
        return w
    return w


def print_transformation(name: str, tsym: TransSym) -> str:
    slots = " ; ".join(print_ctx(c) for c in tsym.contexts)
    entries = " ; ".join(
        print_protype(pt, tsym.contexts[i], tsym.contexts[i + 1])
        for i, pt in enumerate(tsym.domain)
    )
    cod = print_protype(tsym.codomain, tsym.contexts[0], tsym.contexts[-1])
    if entries:
        return f"transformation {name} : {slots} | {entries} => {cod}"
    return f"transformation {name} : {slots} | => {cod}"


def emit_specification(spec: Specification) -> list[str]:
    lines: list[str] = []
    for name in sorted(spec.sig.categories):
        lines.append(f"category {name}")
    for name, (src, tgt) in spec.sig.functors.items():
        lines.append(f"functor {name} : {src} -> {tgt}")
    for name, (src, tgt) in spec.sig.profunctors.items():
        lines.append(f"profunctor {name} : {src} -|-> {tgt}")
    for name, tsym in spec.sig.transformations.items():
        lines.append(print_transformation(name, tsym))
    for name, (l, r) in spec.isos.items():
        lines.append(f"iso {name} : {l} ~=~ {r}")
    for ax in spec.term_axioms:
        lines.append(
            f"axiom term {print_ctx(ax.context)} |- "
            f"{print_term(ax.lhs, ax.context)} == {print_term(ax.rhs, ax.context)}"
            f" : {print_type(ax.ty)}"
        )
    for ax in spec.proterm_axioms:
        g0, gn = ax.proctx.outer()
        lines.append(
            f"axiom proterm {print_proctx(ax.proctx)} |-\n"
            f"  {print_proterm(ax.lhs, ax.proctx, spec)} == "
            f"{print_proterm(ax.rhs, ax.proctx, spec)}"
            f" : {print_protype(ax.protype, g0, gn)}"
        )
    return lines


def translate_file(
    text: str, path: str = "<input>", cfg: RewriteConfig = DEFAULT_CONFIG
) -> str:
    """Parse, check, unfold, and re-emit a declaration file."""
    session = Session(cfg)
    session.load_text(text, path)
    if not session.report.all_ok:
        bad = [i.name for i in session.report.items if i.status != "ok"]
        raise ValueError(f"input file does not check: {', '.join(bad)}")
    old_spec = session.spec
    new_spec = ufd_translate(old_spec)
    lines = emit_specification(new_spec)
    lines.append("")
    for record in session.theorems:
        name, kind, data = record.name, record.kind, record.judgment
        if kind == "proterm":
            p, m, target = data
            m2 = ufd_proterm(old_spec, p, m)
            g0, gn = p.outer()
            lines.append(
                f"theorem {name} : {print_proctx(p)} |-\n"
                f"  {print_proterm(m2, p, new_spec)} : "
                f"{print_protype(target, g0, gn)}"
            )
        elif kind == "iso":
            assert isinstance(data, IsoJudgment)
            w2 = _translate_isoexpr(
                old_spec, data.witness, data.left_ctx, data.right_ctx,
                data.lhs, data.rhs,
            )
            lines.append(
                f"theorem {name} : {print_ctx(data.left_ctx)} ; "
                f"{print_ctx(data.right_ctx)} |- "
                f"{print_protype(data.lhs, data.left_ctx, data.right_ctx)}"
                f" ~=~ "
                f"{print_protype(data.rhs, data.left_ctx, data.right_ctx)}\n"
                f"  := {print_isoexpr(w2, data.left_ctx, data.right_ctx, data.lhs, data.rhs, new_spec)}"
            )
    return "\n".join(lines) + "\n"
