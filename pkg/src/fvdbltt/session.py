"""Processing of declaration files: scope, checking, reports.

Declarations extend the specification in order; theorem and check
blocks are verified as they appear.  Proterm-typing theorems that check
become reusable derived rules (instantiable like symbols), and iso
theorems additionally register their round-trip collapses as
session-local rewrite rules for later equality searches.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional

from . import parser as ps
from . import subst as sb
from .checker import (
    DEFAULT_CONFIG,
    OK,
    RewriteConfig,
    Verdict,
    check_context,
    check_procontext,
    check_proterm,
    check_protype,
    check_term,
    check_term_eq,
    check_term_subst,
    check_type,
)
from .syntax import (
    Context,
    Procontext,
    ProfApp,
    ProtermAxiom,
    Protype,
    Proterm,
    Signature,
    Specification,
    TermAxiom,
    TermSubst,
    TransSym,
    chain_transform,
)


@dataclass
class ReportItem:
    name: str
    kind: str
    status: str
    elapsed: float
    details: str = ""
    normalized: tuple[str, ...] = ()

    def json(self) -> dict:
        out = {
            "name": self.name,
            "kind": self.kind,
            "status": self.status,
            "elapsed_ms": round(self.elapsed * 1000.0, 3),
        }
        if self.details:
            out["details"] = self.details
        if self.normalized:
            out["normalized"] = list(self.normalized)
        return out


@dataclass
class Report:
    items: list[ReportItem] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        out = {"ok": 0, "fail": 0, "unknown": 0}
        for item in self.items:
            out[item.status] = out.get(item.status, 0) + 1
        return out

    @property
    def all_ok(self) -> bool:
        return all(item.status == "ok" for item in self.items)


class LoadError(Exception):
    """Scope or well-formedness error while loading declarations."""


@dataclass
class TheoremRecord:
    name: str
    kind: str
    judgment: object


class Session:
    def __init__(self, cfg: RewriteConfig = DEFAULT_CONFIG):
        self.cfg = cfg
        self.spec = Specification(Signature())
        self.env = ps.ResolveEnv(self.spec)
        self.derived_rules: list[ProtermAxiom] = []
        self.report = Report()
        self.theorems: list[TheoremRecord] = []
        self.obligations: list[tuple[str, str, object]] = []  # (name, kind, record)
        self._check_count = 0
        self._axiom_count = 0

    # -- signature growth (specifications are immutable; rebuild)

    def _set_spec(self, spec: Specification) -> None:
        self.spec = spec
        self.env.spec = spec

    def _with_sig(self, **kw) -> None:
        self._set_spec(replace(self.spec, sig=replace(self.spec.sig, **kw)))

    def load_source(self, source: ps.SourceFile) -> Report:
        for decl in source.decls:
            self.load_decl(decl)
        return self.report

    def load_text(self, text: str, path: str = "<input>") -> Report:
        return self.load_source(ps.parse_file(text, path))

    def load_decl(self, decl: ps.RDecl) -> None:
        try:
            self._load_decl(decl)
        except (ps.ResolveError, sb.SubstError, ValueError) as e:
            raise LoadError(f"{decl.kind} {decl.name or ''}: {e}".strip()) from e

    def _load_decl(self, decl: ps.RDecl) -> None:
        sig = self.spec.sig
        if decl.kind == "category":
            if decl.name in sig.categories:
                raise LoadError(f"category {decl.name!r} already declared")
            self._with_sig(categories=sig.categories | {decl.name})
            return
        if decl.kind == "functor":
            src, tgt = decl.names
            for c in (src, tgt):
                if c not in sig.categories:
                    raise LoadError(
                        f"functor {decl.name}: undeclared category {c!r}"
                    )
            if decl.name in sig.functors:
                raise LoadError(f"functor {decl.name!r} already declared")
            self._with_sig(functors={**sig.functors, decl.name: (src, tgt)})
            return
        if decl.kind == "profunctor":
            src, tgt = decl.names
            for c in (src, tgt):
                if c not in sig.categories:
                    raise LoadError(
                        f"profunctor {decl.name}: undeclared category {c!r}"
                    )
            if decl.name in sig.profunctors:
                raise LoadError(f"profunctor {decl.name!r} already declared")
            self._with_sig(profunctors={**sig.profunctors, decl.name: (src, tgt)})
            return
        if decl.kind == "transformation":
            tsym = self._resolve_transsig(decl)
            if decl.name in sig.transformations:
                raise LoadError(f"transformation {decl.name!r} already declared")
            self._with_sig(
                transformations={**sig.transformations, decl.name: tsym}
            )
            return
        if decl.kind == "iso":
            lname, rname = decl.names
            for n in (lname, rname):
                if n not in sig.profunctors:
                    raise LoadError(f"iso {decl.name}: undeclared profunctor {n!r}")
            if sig.profunctors[lname] != sig.profunctors[rname]:
                raise LoadError(
                    f"iso {decl.name}: {lname} and {rname} have different arities"
                )
            if decl.name in self.spec.isos:
                raise LoadError(f"iso {decl.name!r} already declared")
            self._set_spec(
                replace(self.spec, isos={**self.spec.isos, decl.name: (lname, rname)})
            )
            return
        if decl.kind == "axiom":
            self._load_axiom(decl)
            return
        if decl.kind in ("theorem", "check"):
            self._run_block(decl)
            return
        raise LoadError(f"unknown declaration kind {decl.kind!r}")

    def _resolve_transsig(self, decl: ps.RDecl) -> TransSym:
        assert decl.transsig is not None
        if decl.transsig[0] == "chain":
            _, names, cod = decl.transsig
            for n in tuple(names) + (cod,):
                if n not in self.spec.sig.profunctors:
                    raise LoadError(
                        f"transformation {decl.name}: undeclared profunctor {n!r}"
                    )
            return chain_transform(self.spec.sig, tuple(names), cod)
        _, rslots, rentries, rcod = decl.transsig
        slots = tuple(ps.resolve_ctx(self.env, c) for c in rslots)
        if len(slots) != len(rentries) + 1:
            raise LoadError(
                f"transformation {decl.name}: {len(slots)} contexts need "
                f"{len(slots) - 1} entries, got {len(rentries)}"
            )
        entries = tuple(
            ps.resolve_protype(self.env, e, slots[i], slots[i + 1])
            for i, e in enumerate(rentries)
        )
        cod = ps.resolve_protype(self.env, rcod, slots[0], slots[-1])
        for i, e in enumerate(entries):
            v = check_protype(self.spec, slots[i], slots[i + 1], e)
            if not v.ok:
                raise LoadError(f"transformation {decl.name}: entry {i+1}: {v.reason}")
        v = check_protype(self.spec, slots[0], slots[-1], cod)
        if not v.ok:
            raise LoadError(f"transformation {decl.name}: codomain: {v.reason}")
        return TransSym(slots, entries, cod)

    def _load_axiom(self, decl: ps.RDecl) -> None:
        j = decl.judgment
        assert j is not None
        self._axiom_count += 1
        name = f"ax{self._axiom_count}"
        if j.kind == "termeq":
            ctx = ps.resolve_ctx(self.env, j.ctx)
            ty = ps.resolve_type(self.env, j.ty)
            lhs = ps.resolve_term(self.env, j.terms[0], ctx)
            rhs = ps.resolve_term(self.env, j.terms[1], ctx)
            for side, t in (("left", lhs), ("right", rhs)):
                v = check_term(self.spec, ctx, t, ty)
                if not v.ok:
                    raise LoadError(f"term axiom, {side} side: {v.reason}")
            self._set_spec(
                replace(
                    self.spec,
                    term_axioms=self.spec.term_axioms
                    + (TermAxiom(ctx, lhs, rhs, ty, name),),
                )
            )
            return
        assert j.kind == "protermeq"
        from .rewrite import normalize_proterm

        p = ps.resolve_proctx(self.env, j.proctx)
        g0, gn = p.outer()
        target = ps.resolve_protype(self.env, j.protypes[0], g0, gn)
        resolver = ps._PResolver(self.env, p)
        lhs = resolver.resolve(j.proterms[0], target)
        rhs = resolver.resolve(j.proterms[1], target)
        for side, m in (("left", lhs), ("right", rhs)):
            v = check_proterm(self.spec, p, m, target, self.cfg)
            if not v.ok:
                raise LoadError(f"proterm axiom, {side} side: {v.reason}")
        # matching happens on normalized goals, so store normalized sides
        lhs = normalize_proterm(self.spec, p, lhs, target, self.cfg)
        rhs = normalize_proterm(self.spec, p, rhs, target, self.cfg)
        self._set_spec(
            replace(
                self.spec,
                proterm_axioms=self.spec.proterm_axioms
                + (ProtermAxiom(p, lhs, rhs, target, name),),
            )
        )

    # -- theorem and check blocks

    def _run_block(self, decl: ps.RDecl) -> None:
        j = decl.judgment
        assert j is not None
        if decl.kind == "check":
            self._check_count += 1
            name = f"check#{self._check_count}"
        else:
            name = decl.name
        start = time.perf_counter()
        try:
            kind, verdict, normalized, record = self._judge(decl, j)
        except (ps.ResolveError, sb.SubstError) as e:
            raise LoadError(f"{decl.kind} {name}: {e}") from e
        elapsed = time.perf_counter() - start
        self.report.items.append(
            ReportItem(name, kind, verdict.status, elapsed, verdict.reason, normalized)
        )
        if verdict.ok and record is not None:
            self.obligations.append((name, kind, record))
        if decl.kind == "theorem" and verdict.ok and record is not None:
            self.theorems.append(TheoremRecord(name, kind, record))
            if kind == "proterm":
                p, m, target = record
                self.env.proterm_thms[name] = (p, m, target)
            elif kind == "iso":
                from .isocalc import IsoJudgment, round_trip_rules

                assert isinstance(record, IsoJudgment)
                self.env.iso_thms[name] = record
                self.derived_rules.extend(
                    round_trip_rules(self.spec, record, self.cfg)
                )

    def _judge(self, decl: ps.RDecl, j: ps.RJudgment):
        env, spec, cfg = self.env, self.spec, self.cfg
        if j.kind == "type":
            ty = ps.resolve_type(env, j.ty)
            return "type", check_type(spec, ty), (), None
        if j.kind == "ctx":
            ctx = ps.resolve_ctx(env, j.ctx)
            return "ctx", check_context(spec, ctx), (), None
        if j.kind == "proctx":
            p = ps.resolve_proctx(env, j.proctx)
            return "proctx", check_procontext(spec, p), (), None
        if j.kind == "term":
            ctx = ps.resolve_ctx(env, j.ctx)
            ty = ps.resolve_type(env, j.ty)
            t = ps.resolve_term(env, j.terms[0], ctx)
            return "term", check_term(spec, ctx, t, ty), (), None
        if j.kind == "subst":
            ctx = ps.resolve_ctx(env, j.ctx)
            target = ps.resolve_ctx(env, j.ctx2)
            terms = tuple(ps.resolve_term(env, t, ctx) for t in j.terms)
            if len(terms) != len(target):
                raise LoadError("substitution arity mismatch")
            s = TermSubst(target, terms)
            return "subst", check_term_subst(spec, ctx, s), (), None
        if j.kind == "termeq":
            ctx = ps.resolve_ctx(env, j.ctx)
            ty = ps.resolve_type(env, j.ty)
            s = ps.resolve_term(env, j.terms[0], ctx)
            t = ps.resolve_term(env, j.terms[1], ctx)
            v = check_term_eq(spec, ctx, s, t, ty, cfg)
            return "termeq", v, v.evidence, (ctx, s, t)
        if j.kind == "protype":
            gamma = ps.resolve_ctx(env, j.ctx)
            delta = ps.resolve_ctx(env, j.ctx2)
            pt = ps.resolve_protype(env, j.protypes[0], gamma, delta)
            return "protype", check_protype(spec, gamma, delta, pt), (), None
        if j.kind == "protypeeq":
            from .checker import protype_equal

            gamma = ps.resolve_ctx(env, j.ctx)
            delta = ps.resolve_ctx(env, j.ctx2)
            a = ps.resolve_protype(env, j.protypes[0], gamma, delta)
            b = ps.resolve_protype(env, j.protypes[1], gamma, delta)
            for side, pt in (("left", a), ("right", b)):
                v = check_protype(spec, gamma, delta, pt)
                if not v.ok:
                    raise LoadError(f"protype equality, {side} side: {v.reason}")
            v = protype_equal(spec, gamma, delta, a, b, cfg)
            return "protypeeq", v, (), (gamma, delta, a, b)
        if j.kind == "proterm":
            p = ps.resolve_proctx(env, j.proctx)
            g0, gn = p.outer()
            target = ps.resolve_protype(env, j.protypes[0], g0, gn)
            m = ps._PResolver(env, p).resolve(j.proterms[0], target)
            v = check_proterm(spec, p, m, target, cfg)
            return "proterm", v, (), (p, m, target)
        if j.kind == "protermeq":
            from .rewrite import check_proterm_eq

            p = ps.resolve_proctx(env, j.proctx)
            g0, gn = p.outer()
            target = ps.resolve_protype(env, j.protypes[0], g0, gn)
            resolver = ps._PResolver(env, p)
            m = resolver.resolve(j.proterms[0], target)
            n = resolver.resolve(j.proterms[1], target)
            v = check_proterm_eq(spec, p, m, n, target, cfg, self.derived_rules)
            return "protermeq", v, v.evidence, (p, target)
        if j.kind == "iso":
            from .isocalc import IsoJudgment, check_iso

            gamma = ps.resolve_ctx(env, j.ctx)
            delta = ps.resolve_ctx(env, j.ctx2)
            lhs = ps.resolve_protype(env, j.protypes[0], gamma, delta)
            rhs = ps.resolve_protype(env, j.protypes[1], gamma, delta)
            if decl.witness is None:
                raise LoadError(
                    f"iso judgment {decl.name or ''} needs a ':=' witness"
                )
            w = ps.resolve_isoexpr(env, decl.witness, gamma, delta, lhs, rhs)
            ij = IsoJudgment(gamma, delta, lhs, rhs, w, decl.name)
            v = check_iso(spec, ij, cfg, self.derived_rules)
            return "iso", v, (), ij
        raise LoadError(f"unknown judgment kind {j.kind!r}")


def run_file(
    path: str, cfg: RewriteConfig = DEFAULT_CONFIG
) -> tuple[Optional[Session], Report, Optional[str]]:
    """Load and check a file; returns (session, report, load-error)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        return None, Report(), str(e)
    session = Session(cfg)
    try:
        session.load_text(text, path)
    except (ps.ParseError, LoadError) as e:
        return None, session.report, f"{path}: {e}"
    return session, session.report, None
