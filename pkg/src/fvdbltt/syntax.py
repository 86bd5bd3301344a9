"""Abstract syntax for the virtual double category type theory.

Three syntactic layers: terms in cartesian contexts, protypes over
two-sided contexts, and proterms over procontexts (chained hypothesis
lists).  Term variables are positional indices into the context they
live in; surface names survive only as non-compared hints, so
structural equality of terms, types, and protypes *is* alpha equality.
Provariables are named, with explicit binders on the proterm
constructors that introduce hypotheses.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


# ---------------------------------------------------------------------------
# types and contexts


class TypeExpr:
    __slots__ = ()


@dataclass(frozen=True)
class BaseT(TypeExpr):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class UnitT(TypeExpr):
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True)
class ProdT(TypeExpr):
    left: TypeExpr
    right: TypeExpr

    def __str__(self) -> str:
        return f"({self.left} * {self.right})"


UNIT = UnitT()


def prod(*types: TypeExpr) -> TypeExpr:
    """Right-nested product; the unit for the empty run."""
    if not types:
        return UNIT
    out = types[-1]
    for t in reversed(types[:-1]):
        out = ProdT(t, out)
    return out


@dataclass(frozen=True)
class Context:
    """Ordered list of typed variables.  Names are printing hints."""

    entries: tuple[tuple[str, TypeExpr], ...] = ()

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, TypeExpr]]:
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Context):
            return NotImplemented
        return self.types() == other.types()

    def __hash__(self) -> int:
        return hash(self.types())

    def types(self) -> tuple[TypeExpr, ...]:
        return tuple(ty for _, ty in self.entries)

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.entries)

    def extend(self, name: str, ty: TypeExpr) -> "Context":
        return Context(self.entries + ((name, ty),))

    def lookup(self, name: str) -> Optional[int]:
        for i, (n, _) in enumerate(self.entries):
            if n == name:
                return i
        return None

    def __str__(self) -> str:
        if not self.entries:
            return "."
        return ", ".join(f"{n}:{t}" for n, t in self.entries)


def ctx(*entries: tuple[str, TypeExpr]) -> Context:
    return Context(tuple(entries))


# ---------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    index: int
    hint: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.hint or f"#{self.index}"


@dataclass(frozen=True)
class UnitTm(Term):
    def __str__(self) -> str:
        return "<>"


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term

    def __str__(self) -> str:
        return f"<{self.fst}, {self.snd}>"


@dataclass(frozen=True)
class Proj(Term):
    side: int  # 0 or 1
    body: Term

    def __str__(self) -> str:
        return f"{self.body}.{self.side}"


@dataclass(frozen=True)
class FunApp(Term):
    sym: str
    arg: Term

    def __str__(self) -> str:
        return f"{self.sym}({self.arg})"


UNIT_TM = UnitTm()


@dataclass(frozen=True)
class TermSubst:
    """A tuple of terms, one per entry of the target context.

    The components live in some source context; ``Γ ⊢ S / Δ`` keeps the
    target ``Δ`` around so well-typedness is checkable.
    """

    target: Context
    components: tuple[Term, ...]

    def __post_init__(self) -> None:
        if len(self.components) != len(self.target):
            raise ValueError(
                f"substitution arity {len(self.components)} != target {len(self.target)}"
            )

    def __str__(self) -> str:
        return ", ".join(str(t) for t in self.components)


def identity_subst(gamma: Context) -> TermSubst:
    return TermSubst(
        gamma, tuple(Var(i, n) for i, (n, _) in enumerate(gamma.entries))
    )


def is_identity_subst(s: TermSubst) -> bool:
    return all(
        isinstance(t, Var) and t.index == i for i, t in enumerate(s.components)
    )


def is_renaming_subst(s: TermSubst) -> bool:
    return all(isinstance(t, Var) for t in s.components)


# ---------------------------------------------------------------------------
# protypes

# A protype over a two-sided context (Γ ; Δ) never stores its frame;
# the judgment supplies it, and every sub-term's side is determined by
# the constructor shape.


class Protype:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Protype):
    def __str__(self) -> str:
        return "T"


@dataclass(frozen=True)
class And(Protype):
    left: Protype
    right: Protype

    def __str__(self) -> str:
        return f"({self.left} /\\ {self.right})"


@dataclass(frozen=True)
class ProfApp(Protype):
    sym: str
    left: Term  # in Γ
    right: Term  # in Δ

    def __str__(self) -> str:
        return f"{self.sym}({self.left}; {self.right})"


@dataclass(frozen=True)
class Ide(Protype):
    """Path protype ``s =I= t``: the unit loose arrow at type I."""

    ty: TypeExpr
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"({self.left} ={self.ty}= {self.right})"


@dataclass(frozen=True)
class Tensor(Protype):
    """``α (x:I)@ β``: loose composite; α over (Γ; x:I), β over (x:I; Δ)."""

    var: str = field(compare=False)
    ty: TypeExpr
    left: Protype
    right: Protype

    def __str__(self) -> str:
        return f"({self.left} ({self.var or '_'}:{self.ty})@ {self.right})"


@dataclass(frozen=True)
class Filler(Protype):
    """``α (x:I)|> γ``: right extension; α over (x:I; Γ), γ over (x:I; Δ)."""

    var: str = field(compare=False)
    ty: TypeExpr
    along: Protype
    target: Protype

    def __str__(self) -> str:
        return f"({self.along} ({self.var or '_'}:{self.ty})|> {self.target})"


TOP = Top()


# ---------------------------------------------------------------------------
# procontexts


@dataclass(frozen=True)
class Procontext:
    """Contexts Γ0;…;Γn with hypotheses a_i : α_i over (Γ_{i-1}; Γ_i)."""

    slots: tuple[Context, ...]
    hyps: tuple[tuple[str, Protype], ...] = ()

    def __post_init__(self) -> None:
        if len(self.slots) != len(self.hyps) + 1:
            raise ValueError("procontext needs exactly one more slot than hypotheses")

    def hyp_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.hyps)

    def hyp_index(self, name: str) -> Optional[int]:
        for i, (n, _) in enumerate(self.hyps):
            if n == name:
                return i
        return None

    def outer(self) -> tuple[Context, Context]:
        return self.slots[0], self.slots[-1]

    def sub(self, lo: int, hi: int) -> "Procontext":
        """Slice spanning slots lo..hi (hypotheses lo..hi-1)."""
        return Procontext(self.slots[lo : hi + 1], self.hyps[lo:hi])

    def __str__(self) -> str:
        slots = " ; ".join(str(s) for s in self.slots)
        hyps = "; ".join(f"{n} : {p}" for n, p in self.hyps)
        return f"{slots} | {hyps}"


# ---------------------------------------------------------------------------
# proterms


class Proterm:
    __slots__ = ()


@dataclass(frozen=True)
class ProVar(Proterm):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TransApp(Proterm):
    """``κ(S0; …; Sn){μ1; …; μn}`` for a transformation symbol κ.

    ``groups[i]`` is the tuple of terms substituted for the symbol's
    i-th declared context, living in the procontext slot at the i-th
    argument boundary.
    """

    sym: str
    groups: tuple[tuple[Term, ...], ...]
    args: tuple[Proterm, ...] = ()

    def __str__(self) -> str:
        gs = "; ".join(", ".join(str(t) for t in g) for g in self.groups)
        ms = "; ".join(str(m) for m in self.args)
        return f"{self.sym}({gs}){{{ms}}}"


@dataclass(frozen=True)
class PPair(Proterm):
    fst: Proterm
    snd: Proterm

    def __str__(self) -> str:
        return f"<{self.fst}, {self.snd}>"


@dataclass(frozen=True)
class PProj(Proterm):
    side: int
    body: Proterm

    def __str__(self) -> str:
        return f"{self.body}.{self.side}"


@dataclass(frozen=True)
class PUnit(Proterm):
    def __str__(self) -> str:
        return "<>"


@dataclass(frozen=True)
class Refl(Proterm):
    """``refl(t)``: the identity cell on the path protype at t."""

    term: Term

    def __str__(self) -> str:
        return f"refl({self.term})"


@dataclass(frozen=True)
class IdeElim(Proterm):
    """``ind y ~ y2 by a in μ``: eliminate hypothesis a : y =I= y2.

    The site's two singleton slots around the hypothesis merge into one
    in the body's procontext.
    """

    hyp: str
    body: Proterm
    merged: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"ind[{self.hyp}]({self.body})"


@dataclass(frozen=True)
class TensorIntro(Proterm):
    left: Proterm
    right: Proterm

    def __str__(self) -> str:
        return f"({self.left} @ {self.right})"


@dataclass(frozen=True)
class TensorElim(Proterm):
    """``split d as a @ x @ b in μ``: eliminate d : α (x:I)@ β."""

    hyp: str
    left: str
    var: str = field(compare=False)
    right: str = ""
    body: Proterm = field(default=None)  # type: ignore[assignment]

    def __str__(self) -> str:
        return (
            f"split {self.hyp} as {self.left} @ {self.var or '_'} @ {self.right}"
            f" in {self.body}"
        )


@dataclass(frozen=True)
class FillerIntro(Proterm):
    """``\\(x, a). μ``: abstract the leading slot x and hypothesis a.

    Carries the bound slot type and the abstracted hypothesis protype so
    the constructor is self-contained under substitution.
    """

    var: str = field(compare=False)
    ty: TypeExpr = field(default=None)  # type: ignore[assignment]
    hyp: str = ""
    along: Protype = field(default=None)  # type: ignore[assignment]
    body: Proterm = field(default=None)  # type: ignore[assignment]

    def __str__(self) -> str:
        return f"\\({self.var or '_'}, {self.hyp}). {self.body}"


@dataclass(frozen=True)
class FillerElim(Proterm):
    """``μ |> ν``: evaluate ν : α (x)|> γ at the argument μ : α."""

    arg: Proterm
    fun: Proterm

    def __str__(self) -> str:
        return f"({self.arg} |> {self.fun})"


@dataclass(frozen=True)
class IsoApp(Proterm):
    """Apply a protype isomorphism to a proterm, forwards or backwards."""

    iso: "IsoExpr"
    forward: bool
    arg: Proterm

    def __str__(self) -> str:
        inv = "" if self.forward else "^-1"
        return f"{self.iso}{inv}{{{self.arg}}}"


@dataclass(frozen=True)
class Composite(Proterm):
    """The composition-rule residual ``ν[S̄/Δ̄]⦃μ̄/b̄⦄``.

    ``inner`` is ν's own procontext, ``subst`` gives one term group per
    inner slot, and ``bindings`` one proterm per inner hypothesis.
    Fully-evaluable composites are normalized away; this node remains
    only where a binding or slot substitution is stuck on a binder.
    """

    inner: Procontext
    body: Proterm
    subst: tuple[tuple[Term, ...], ...]
    bindings: tuple[Proterm, ...]

    def __post_init__(self) -> None:
        if len(self.subst) != len(self.inner.slots):
            raise ValueError("composite needs one term group per inner slot")
        if len(self.bindings) != len(self.inner.hyps):
            raise ValueError("composite needs one binding per inner hypothesis")

    def __str__(self) -> str:
        gs = "; ".join(", ".join(str(t) for t in g) for g in self.subst)
        bs = "; ".join(
            f"{m}/{n}" for (n, _), m in zip(self.inner.hyps, self.bindings)
        )
        return f"({self.body})[{gs}]{{{bs}}}"


P_UNIT = PUnit()


# ---------------------------------------------------------------------------
# protype isomorphism expressions


class IsoExpr:
    __slots__ = ()


@dataclass(frozen=True)
class IdIso(IsoExpr):
    protype: Protype

    def __str__(self) -> str:
        return f"idt({self.protype})"


@dataclass(frozen=True)
class CompIso(IsoExpr):
    """``after ∘ before`` (before applies first)."""

    after: IsoExpr
    before: IsoExpr

    def __str__(self) -> str:
        return f"({self.before} >> {self.after})"


@dataclass(frozen=True)
class InvIso(IsoExpr):
    inner: IsoExpr

    def __str__(self) -> str:
        return f"{self.inner}^-1"


@dataclass(frozen=True)
class PairIso(IsoExpr):
    """Forward/backward proterm pair, each with its hypothesis name."""

    fwd_hyp: str
    fwd: Proterm
    bwd_hyp: str
    bwd: Proterm

    def __str__(self) -> str:
        return f"[{self.fwd_hyp} => {self.fwd}, {self.bwd_hyp} => {self.bwd}]"


@dataclass(frozen=True)
class SymIso(IsoExpr):
    """A declared isomorphism symbol between two profunctor symbols."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ThmIso(IsoExpr):
    """A previously proven iso theorem, resolved to its content."""

    name: str
    left_ctx: Context = field(compare=False)
    right_ctx: Context = field(compare=False)
    lhs: Protype = field(compare=False)
    rhs: Protype = field(compare=False)
    witness: "IsoExpr" = field(compare=False)

    def __str__(self) -> str:
        return self.name


# ---------------------------------------------------------------------------
# signatures and specifications


@dataclass(frozen=True)
class TransSym:
    """Transformation symbol with its declared frame.

    ``contexts`` has one context per boundary (n+1 of them), ``domain``
    the n chained entry protypes (entry i over (contexts[i];
    contexts[i+1])) and ``codomain`` a protype over (contexts[0];
    contexts[-1]).  The common profunctor-chain declarations elaborate
    to singleton generic contexts.
    """

    contexts: tuple[Context, ...]
    domain: tuple[Protype, ...]
    codomain: Protype


@dataclass(frozen=True)
class Signature:
    categories: frozenset[str] = frozenset()
    functors: dict[str, tuple[str, str]] = field(default_factory=dict)
    profunctors: dict[str, tuple[str, str]] = field(default_factory=dict)
    transformations: dict[str, TransSym] = field(default_factory=dict)

    def __hash__(self) -> int:  # dict fields; identity hashing is fine here
        return id(self)


@dataclass(frozen=True)
class TermAxiom:
    context: Context
    lhs: Term
    rhs: Term
    ty: TypeExpr
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class ProtermAxiom:
    proctx: Procontext
    lhs: Proterm
    rhs: Proterm
    protype: Protype
    name: str = field(default="", compare=False)


@dataclass(frozen=True)
class Specification:
    sig: Signature
    isos: dict[str, tuple[str, str]] = field(default_factory=dict)
    term_axioms: tuple[TermAxiom, ...] = ()
    proterm_axioms: tuple[ProtermAxiom, ...] = ()

    def __hash__(self) -> int:
        return id(self)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    location: str = ""

    def __str__(self) -> str:
        loc = f"{self.location}: " if self.location else ""
        return f"{loc}{self.code}: {self.message}"


def validate_signature(sig: Signature) -> list[Diagnostic]:
    """Every referenced symbol resolves and transformation frames chain."""
    out: list[Diagnostic] = []

    def check_type(ty: TypeExpr, where: str) -> None:
        if isinstance(ty, BaseT):
            if ty.name not in sig.categories:
                out.append(
                    Diagnostic("UndeclaredCategory", f"category {ty.name!r}", where)
                )
        elif isinstance(ty, ProdT):
            check_type(ty.left, where)
            check_type(ty.right, where)

    for name, (src, tgt) in sig.functors.items():
        for cat in (src, tgt):
            if cat not in sig.categories:
                out.append(
                    Diagnostic(
                        "UndeclaredCategory", f"category {cat!r}", f"functor {name}"
                    )
                )
    for name, (left, right) in sig.profunctors.items():
        for cat in (left, right):
            if cat not in sig.categories:
                out.append(
                    Diagnostic(
                        "UndeclaredCategory",
                        f"category {cat!r}",
                        f"profunctor {name}",
                    )
                )
    for name, tsym in sig.transformations.items():
        where = f"transformation {name}"
        if len(tsym.contexts) != len(tsym.domain) + 1:
            out.append(
                Diagnostic("ChainingMismatch", "context/entry count mismatch", where)
            )
            continue
        for c in tsym.contexts:
            for _, ty in c:
                check_type(ty, where)
        for pt in tsym.domain + (tsym.codomain,):
            for d in _protype_symbol_refs(pt, sig):
                out.append(Diagnostic(d[0], d[1], where))
    return out


def _protype_symbol_refs(pt: Protype, sig: Signature) -> list[tuple[str, str]]:
    out: list[tuple[str, str]] = []
    if isinstance(pt, ProfApp):
        if pt.sym not in sig.profunctors:
            out.append(("UndeclaredProfunctor", f"profunctor {pt.sym!r}"))
    elif isinstance(pt, And):
        out += _protype_symbol_refs(pt.left, sig)
        out += _protype_symbol_refs(pt.right, sig)
    elif isinstance(pt, Tensor):
        out += _protype_symbol_refs(pt.left, sig)
        out += _protype_symbol_refs(pt.right, sig)
    elif isinstance(pt, Filler):
        out += _protype_symbol_refs(pt.along, sig)
        out += _protype_symbol_refs(pt.target, sig)
    return out


def chain_transform(
    sig: Signature, domain: tuple[str, ...], codomain: str
) -> TransSym:
    """Elaborate a bare profunctor-symbol chain to a generic frame."""
    cats: list[str] = []
    for i, p in enumerate(domain):
        left, right = sig.profunctors[p]
        if i == 0:
            cats.append(left)
        elif cats[-1] != left:
            raise ValueError(f"chain breaks at {p}: {cats[-1]} != {left}")
        cats.append(right)
    cl, cr = sig.profunctors[codomain]
    if not domain:
        if cl != cr:
            raise ValueError(f"nullary codomain {codomain} must be endo")
        cats = [cl]
    else:
        if cats[0] != cl or cats[-1] != cr:
            raise ValueError(f"codomain {codomain} does not match chain boundary")
    contexts = tuple(
        Context(((f"x{i}", BaseT(c)),)) for i, c in enumerate(cats)
    )
    dom = tuple(
        ProfApp(p, Var(0, f"x{i}"), Var(0, f"x{i+1}"))
        for i, p in enumerate(domain)
    )
    cod = ProfApp(codomain, Var(0, "x0"), Var(0, f"x{len(cats)-1}"))
    return TransSym(contexts, dom, cod)


# ---------------------------------------------------------------------------
# alpha equality and free variables


def alpha_equal(a: object, b: object, env: Optional[dict[str, str]] = None) -> bool:
    """Equality up to renaming of bound provariables and name hints.

    Types, terms, contexts, and protypes compare structurally (their
    dataclass equality already ignores hints).  Proterms thread a
    renaming environment through the provariable binders.
    """
    if isinstance(a, Proterm) or isinstance(b, Proterm):
        if type(a) is not type(b):
            return False
        return _alpha_proterm(a, b, env or {})
    if isinstance(a, PairIso) and isinstance(b, PairIso):
        return _alpha_proterm(
            a.fwd, b.fwd, {a.fwd_hyp: b.fwd_hyp}
        ) and _alpha_proterm(a.bwd, b.bwd, {a.bwd_hyp: b.bwd_hyp})
    if isinstance(a, Procontext) and isinstance(b, Procontext):
        return (
            a.slots == b.slots
            and len(a.hyps) == len(b.hyps)
            and all(p == q for (_, p), (_, q) in zip(a.hyps, b.hyps))
        )
    return a == b


def _alpha_proterm(a: Proterm, b: Proterm, env: dict[str, str]) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, ProVar):
        return env.get(a.name, a.name) == b.name
    if isinstance(a, TransApp):
        return (
            a.sym == b.sym
            and a.groups == b.groups
            and len(a.args) == len(b.args)
            and all(_alpha_proterm(x, y, env) for x, y in zip(a.args, b.args))
        )
    if isinstance(a, PPair):
        return _alpha_proterm(a.fst, b.fst, env) and _alpha_proterm(a.snd, b.snd, env)
    if isinstance(a, PProj):
        return a.side == b.side and _alpha_proterm(a.body, b.body, env)
    if isinstance(a, (PUnit,)):
        return True
    if isinstance(a, Refl):
        return a.term == b.term
    if isinstance(a, IdeElim):
        if env.get(a.hyp, a.hyp) != b.hyp:
            return False
        return _alpha_proterm(a.body, b.body, env)
    if isinstance(a, TensorIntro):
        return _alpha_proterm(a.left, b.left, env) and _alpha_proterm(
            a.right, b.right, env
        )
    if isinstance(a, TensorElim):
        if env.get(a.hyp, a.hyp) != b.hyp:
            return False
        inner = dict(env)
        inner[a.left] = b.left
        inner[a.right] = b.right
        return _alpha_proterm(a.body, b.body, inner)
    if isinstance(a, FillerIntro):
        if a.ty != b.ty or a.along != b.along:
            return False
        inner = dict(env)
        inner[a.hyp] = b.hyp
        return _alpha_proterm(a.body, b.body, inner)
    if isinstance(a, FillerElim):
        return _alpha_proterm(a.arg, b.arg, env) and _alpha_proterm(
            a.fun, b.fun, env
        )
    if isinstance(a, IsoApp):
        return (
            a.forward == b.forward
            and _alpha_iso(a.iso, b.iso)
            and _alpha_proterm(a.arg, b.arg, env)
        )
    if isinstance(a, Composite):
        if (
            not alpha_equal(a.inner, b.inner)
            or a.subst != b.subst
            or len(a.bindings) != len(b.bindings)
        ):
            return False
        inner_env = {
            n: m for (n, _), (m, _) in zip(a.inner.hyps, b.inner.hyps)
        }
        if not _alpha_proterm(a.body, b.body, inner_env):
            return False
        return all(
            _alpha_proterm(x, y, env) for x, y in zip(a.bindings, b.bindings)
        )
    raise TypeError(f"unknown proterm {type(a).__name__}")


def _alpha_iso(a: IsoExpr, b: IsoExpr) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, IdIso):
        return a.protype == b.protype
    if isinstance(a, CompIso):
        return _alpha_iso(a.after, b.after) and _alpha_iso(a.before, b.before)
    if isinstance(a, InvIso):
        return _alpha_iso(a.inner, b.inner)
    if isinstance(a, PairIso):
        return alpha_equal(a, b)
    if isinstance(a, (SymIso, ThmIso)):
        return a.name == b.name
    raise TypeError(f"unknown iso {type(a).__name__}")


def free_vars(obj: Union[Term, Protype, Proterm]) -> tuple[set, set[str]]:
    """Free term-variable references and free provariable names.

    For a bare term the references are plain context indices; for a
    protype they are (side, index) pairs with side 0 = left context and
    1 = right context, since the two sides are separate namespaces.
    Binder-introduced slots and bound provariables are excluded.  For
    proterms the term references are reported untagged (their slots
    depend on span inference); the provariable half is exact.
    """
    tvs: set = set()
    pvs: set[str] = set()
    if isinstance(obj, Protype):
        _free_protype(obj, tvs, 0, 1)
    else:
        _collect_free(obj, tvs, pvs)
    return tvs, pvs


def _term_indices(t: Term, out: set, tag: Optional[int] = None) -> None:
    if isinstance(t, Var):
        out.add(t.index if tag is None else (tag, t.index))
    elif isinstance(t, Pair):
        _term_indices(t.fst, out, tag)
        _term_indices(t.snd, out, tag)
    elif isinstance(t, Proj):
        _term_indices(t.body, out, tag)
    elif isinstance(t, FunApp):
        _term_indices(t.arg, out, tag)


def _free_protype(
    pt: Protype, tvs: set, left_tag: Optional[int], right_tag: Optional[int]
) -> None:
    """Collect (tag, index) for term vars on unbound sides only."""
    if isinstance(pt, Top):
        return
    if isinstance(pt, And):
        _free_protype(pt.left, tvs, left_tag, right_tag)
        _free_protype(pt.right, tvs, left_tag, right_tag)
    elif isinstance(pt, (ProfApp, Ide)):
        if left_tag is not None:
            _term_indices(pt.left, tvs, left_tag)
        if right_tag is not None:
            _term_indices(pt.right, tvs, right_tag)
    elif isinstance(pt, Tensor):
        _free_protype(pt.left, tvs, left_tag, None)
        _free_protype(pt.right, tvs, None, right_tag)
    elif isinstance(pt, Filler):
        _free_protype(pt.along, tvs, None, left_tag)
        _free_protype(pt.target, tvs, None, right_tag)
    else:
        raise TypeError(f"free_vars: unknown protype {type(pt).__name__}")


def _collect_free(obj: object, tvs: set, pvs: set[str]) -> None:
    if isinstance(obj, (Var, Pair, Proj, FunApp)):
        _term_indices(obj, tvs)
    elif isinstance(obj, (UnitTm, PUnit)):
        pass
    elif isinstance(obj, ProVar):
        pvs.add(obj.name)
    elif isinstance(obj, TransApp):
        for g in obj.groups:
            for t in g:
                _term_indices(t, tvs)
        for m in obj.args:
            _collect_free(m, tvs, pvs)
    elif isinstance(obj, PPair):
        _collect_free(obj.fst, tvs, pvs)
        _collect_free(obj.snd, tvs, pvs)
    elif isinstance(obj, PProj):
        _collect_free(obj.body, tvs, pvs)
    elif isinstance(obj, Refl):
        _term_indices(obj.term, tvs)
    elif isinstance(obj, IdeElim):
        pvs.add(obj.hyp)
        _collect_free(obj.body, tvs, pvs)
    elif isinstance(obj, TensorIntro):
        _collect_free(obj.left, tvs, pvs)
        _collect_free(obj.right, tvs, pvs)
    elif isinstance(obj, TensorElim):
        pvs.add(obj.hyp)
        sub_p: set[str] = set()
        _collect_free(obj.body, tvs, sub_p)
        pvs.update(sub_p - {obj.left, obj.right})
    elif isinstance(obj, FillerIntro):
        sub_p = set()
        _collect_free(obj.body, tvs, sub_p)
        pvs.update(sub_p - {obj.hyp})
    elif isinstance(obj, FillerElim):
        _collect_free(obj.arg, tvs, pvs)
        _collect_free(obj.fun, tvs, pvs)
    elif isinstance(obj, IsoApp):
        _collect_free(obj.arg, tvs, pvs)
    elif isinstance(obj, Composite):
        for g in obj.subst:
            for t in g:
                _term_indices(t, tvs)
        for m in obj.bindings:
            _collect_free(m, tvs, pvs)
    else:
        raise TypeError(f"free_vars: unknown node {type(obj).__name__}")
