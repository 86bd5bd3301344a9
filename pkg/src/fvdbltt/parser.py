"""Surface syntax: lexer, parser, resolver, and pretty-printer.

Files are sequences of declarations processed in order; forward
references are errors.  The parser builds raw named trees; the resolver
turns them into core syntax against the declarations in scope,
resolving variables to context positions.  Within one judgment all
context-variable names must be distinct so that name lookup is
unambiguous across procontext slots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import subst as sb
from .syntax import (
    And,
    BaseT,
    Composite,
    CompIso,
    Context,
    Filler,
    FillerElim,
    FillerIntro,
    FunApp,
    Ide,
    IdeElim,
    IdIso,
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
    Refl,
    Specification,
    SymIso,
    Tensor,
    TensorElim,
    TensorIntro,
    Term,
    ThmIso,
    Top,
    TransApp,
    TransSym,
    TypeExpr,
    UNIT,
    UnitT,
    UnitTm,
    Var,
)

KEYWORDS = {
    "category",
    "functor",
    "profunctor",
    "transformation",
    "iso",
    "axiom",
    "theorem",
    "check",
    "term",
    "proterm",
    "type",
    "ctx",
    "proctx",
    "protype",
    "refl",
    "ind",
    "split",
    "as",
    "in",
    "by",
    "idt",
    "T",
}

PUNCT = [
    "-|->",
    "~=~",
    "^-1",
    ":=",
    "=>",
    "==",
    "->",
    "/\\",
    "|>",
    "|-",
    ".0",
    ".1",
    "(",
    ")",
    "<",
    ">",
    ",",
    ";",
    ":",
    "*",
    "@",
    "=",
    "|",
    "~",
    "\\",
    "[",
    "]",
    "{",
    "}",
    "/",
    ".",
]


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "number" | punctuation literal | "eof"
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "ident"
            out.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            out.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        for p in PUNCT:
            if text.startswith(p, i):
                out.append(Token(p, p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    out.append(Token("eof", "", line, col))
    return out


# ---------------------------------------------------------------------------
# raw surface trees


@dataclass(frozen=True)
class RNode:
    pos: tuple[int, int] = field(compare=False, default=(0, 0))


@dataclass(frozen=True)
class RTy(RNode):
    kind: str = ""  # "base" | "unit" | "prod"
    name: str = ""
    parts: tuple["RTy", ...] = ()


@dataclass(frozen=True)
class RTerm(RNode):
    kind: str = ""  # var | unit | pair | proj | app
    name: str = ""
    side: int = 0
    parts: tuple["RTerm", ...] = ()


@dataclass(frozen=True)
class RCtx(RNode):
    entries: tuple[tuple[str, RTy], ...] = ()


@dataclass(frozen=True)
class RProtype(RNode):
    kind: str = ""  # top | and | prof | ide | tensor | filler
    name: str = ""
    ty: Optional[RTy] = None
    var: str = ""
    terms: tuple[RTerm, ...] = ()
    parts: tuple["RProtype", ...] = ()


@dataclass(frozen=True)
class RProterm(RNode):
    kind: str = ""
    # var | unit | pair | proj | refl | ind | split | lam | tensor | eval
    # | app | isoapp | block
    name: str = ""
    names: tuple[str, ...] = ()
    side: int = 0
    term: Optional[RTerm] = None
    groups: tuple[tuple[RTerm, ...], ...] = ()
    iso: Optional["RIso"] = None
    forward: bool = True
    proctx: Optional["RProctx"] = None
    target: Optional[RProtype] = None
    parts: tuple["RProterm", ...] = ()


@dataclass(frozen=True)
class RProctx(RNode):
    slots: tuple[RCtx, ...] = ()
    hyps: tuple[tuple[str, RProtype], ...] = ()


@dataclass(frozen=True)
class RIso(RNode):
    kind: str = ""  # ref | inv | comp | idt | pair
    name: str = ""
    protype: Optional[RProtype] = None
    hyps: tuple[str, str] = ("", "")
    proterms: tuple[RProterm, ...] = ()
    parts: tuple["RIso", ...] = ()


@dataclass(frozen=True)
class RJudgment(RNode):
    kind: str = ""
    # type | ctx | proctx | term | termeq | subst | protype | protypeeq
    # | iso | proterm | protermeq
    ty: Optional[RTy] = None
    ctx: Optional[RCtx] = None
    ctx2: Optional[RCtx] = None
    terms: tuple[RTerm, ...] = ()
    protypes: tuple[RProtype, ...] = ()
    proctx: Optional[RProctx] = None
    proterms: tuple[RProterm, ...] = ()


@dataclass(frozen=True)
class RDecl(RNode):
    kind: str = ""
    # category | functor | profunctor | transformation | iso | axiom
    # | theorem | check
    name: str = ""
    names: tuple[str, ...] = ()
    transsig: Optional[tuple] = None
    judgment: Optional[RJudgment] = None
    witness: Optional[RIso] = None


@dataclass(frozen=True)
class SourceFile:
    path: str
    decls: tuple[RDecl, ...]


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token plumbing

    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def accept(self, kind: str) -> Optional[Token]:
        if self.at(kind):
            return self.next()
        return None

    def expect(self, kind: str, what: str = "") -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(
                f"expected {what or kind!r}, found {t.text or t.kind!r}", t.line, t.col
            )
        return self.next()

    def ident(self, what: str = "name") -> Token:
        return self.expect("ident", what)

    def err(self, message: str) -> ParseError:
        t = self.peek()
        return ParseError(message, t.line, t.col)

    # -- types

    def parse_type(self) -> RTy:
        t = self.peek()
        left = self._type_atom()
        if self.accept("*"):
            right = self.parse_type()
            return RTy((t.line, t.col), "prod", "", (left, right))
        return left

    def _type_atom(self) -> RTy:
        t = self.peek()
        if self.accept("number"):
            if t.text != "1":
                raise ParseError("the only numeric type is 1", t.line, t.col)
            return RTy((t.line, t.col), "unit")
        if self.accept("("):
            ty = self.parse_type()
            self.expect(")")
            return ty
        tok = self.ident("type")
        return RTy((tok.line, tok.col), "base", tok.text)

    # -- contexts

    def parse_ctx(self) -> RCtx:
        t = self.peek()
        if self.accept("."):
            return RCtx((t.line, t.col))
        entries = []
        while True:
            name = self.ident("variable")
            self.expect(":")
            ty = self.parse_type()
            entries.append((name.text, ty))
            if not self.accept(","):
                break
        return RCtx((t.line, t.col), tuple(entries))

    # -- terms

    def parse_term(self) -> RTerm:
        t = self._term_atom()
        while True:
            if self.accept(".0"):
                t = RTerm(t.pos, "proj", "", 0, (t,))
            elif self.accept(".1"):
                t = RTerm(t.pos, "proj", "", 1, (t,))
            else:
                return t

    def _term_atom(self) -> RTerm:
        t = self.peek()
        if self.accept("<"):
            if self.accept(">"):
                return RTerm((t.line, t.col), "unit")
            a = self.parse_term()
            self.expect(",")
            b = self.parse_term()
            self.expect(">")
            return RTerm((t.line, t.col), "pair", "", 0, (a, b))
        if self.accept("("):
            inner = self.parse_term()
            self.expect(")")
            return inner
        tok = self.ident("term")
        if self.at("("):
            self.next()
            arg = self.parse_term()
            self.expect(")")
            return RTerm((tok.line, tok.col), "app", tok.text, 0, (arg,))
        return RTerm((tok.line, tok.col), "var", tok.text)

    # -- protypes

    def parse_protype(self) -> RProtype:
        left = self._protype_and()
        # binder operators: alpha (x:I)@ beta   /   alpha (x:I)|> beta
        save = self.i
        if self.at("(") and self.peek(1).kind == "ident" and self.peek(2).kind == ":":
            t = self.next()
            var = self.ident("binder variable")
            self.expect(":")
            ty = self.parse_type()
            self.expect(")")
            if self.accept("@"):
                right = self.parse_protype()
                return RProtype(
                    left.pos, "tensor", "", ty, var.text, (), (left, right)
                )
            if self.accept("|>"):
                right = self.parse_protype()
                return RProtype(
                    left.pos, "filler", "", ty, var.text, (), (left, right)
                )
            self.i = save
        return left

    def _protype_and(self) -> RProtype:
        left = self._protype_atom()
        while self.accept("/\\"):
            right = self._protype_atom()
            left = RProtype(left.pos, "and", "", None, "", (), (left, right))
        return left

    def _protype_atom(self) -> RProtype:
        t = self.peek()
        if self.accept("T"):
            return RProtype((t.line, t.col), "top")
        if self.at("("):
            # parenthesized protype unless an ide follows the close
            save = self.i
            try:
                self.next()
                inner = self.parse_protype()
                self.expect(")")
                if not self.at("="):
                    return inner
            except ParseError:
                pass
            self.i = save
        if self.at("ident") and self.peek(1).kind == "(":
            # profunctor application has a semicolon at depth one
            save = self.i
            name = self.next()
            self.next()
            try:
                left = self.parse_term()
                if self.accept(";"):
                    right = self.parse_term()
                    self.expect(")")
                    return RProtype(
                        (name.line, name.col), "prof", name.text, None, "", (left, right)
                    )
            except ParseError:
                pass
            self.i = save
        # an ide protype: term = type = term
        left_term = self.parse_term()
        self.expect("=", "'=' of a path protype")
        ty = self.parse_type()
        self.expect("=", "closing '=' of a path protype")
        right_term = self.parse_term()
        return RProtype(
            left_term.pos, "ide", "", ty, "", (left_term, right_term)
        )

    # -- procontexts

    def parse_slots(self) -> tuple[RCtx, ...]:
        slots = [self.parse_ctx()]
        while self.accept(";"):
            slots.append(self.parse_ctx())
        return tuple(slots)

    def parse_hyps(self) -> tuple[tuple[str, RProtype], ...]:
        if self.at("|-"):
            return ()
        hyps = []
        while True:
            name = self.ident("hypothesis")
            self.expect(":")
            pt = self.parse_protype()
            hyps.append((name.text, pt))
            if not self.accept(";"):
                break
        return tuple(hyps)

    # -- proterms

    def parse_proterm(self) -> RProterm:
        left = self._proterm_postfix()
        if self.accept("@"):
            right = self.parse_proterm()
            return RProterm(left.pos, "tensor", "", (), 0, None, (), None, True, None, None, (left, right))
        if self.accept("|>"):
            right = self.parse_proterm()
            return RProterm(left.pos, "eval", "", (), 0, None, (), None, True, None, None, (left, right))
        return left

    def _proterm_postfix(self) -> RProterm:
        m = self._proterm_atom()
        while True:
            if self.accept(".0"):
                m = RProterm(m.pos, "proj", "", (), 0, None, (), None, True, None, None, (m,))
            elif self.accept(".1"):
                m = RProterm(m.pos, "proj", "", (), 1, None, (), None, True, None, None, (m,))
            else:
                return m

    def _proterm_atom(self) -> RProterm:
        t = self.peek()
        if self.accept("\\"):
            self.expect("(")
            var = self.ident("abstracted variable")
            self.expect(",")
            hyp = self.ident("abstracted hypothesis")
            self.expect(")")
            self.expect(".")
            body = self.parse_proterm()
            return RProterm(
                (t.line, t.col), "lam", "", (var.text, hyp.text), 0, None, (), None, True, None, None, (body,)
            )
        if self.accept("ind"):
            left = self.ident("split variable")
            self.expect("~")
            right = self.ident("fresh variable")
            self.expect("by")
            hyp = self.ident("hypothesis")
            self.expect("in")
            body = self.parse_proterm()
            return RProterm(
                (t.line, t.col), "ind", hyp.text, (left.text, right.text), 0, None, (), None, True, None, None, (body,)
            )
        if self.accept("split"):
            hyp = self.ident("hypothesis")
            self.expect("as")
            a = self.ident("left name")
            self.expect("@")
            x = self.ident("middle variable")
            self.expect("@")
            b = self.ident("right name")
            self.expect("in")
            body = self.parse_proterm()
            return RProterm(
                (t.line, t.col), "split", hyp.text, (a.text, x.text, b.text), 0, None, (), None, True, None, None, (body,)
            )
        if self.accept("refl"):
            self.expect("(")
            term = self.parse_term()
            self.expect(")")
            return RProterm((t.line, t.col), "refl", "", (), 0, term)
        if self.accept("<"):
            if self.accept(">"):
                return RProterm((t.line, t.col), "unit")
            a = self.parse_proterm()
            self.expect(",")
            b = self.parse_proterm()
            self.expect(">")
            return RProterm((t.line, t.col), "pair", "", (), 0, None, (), None, True, None, None, (a, b))
        if self.accept("("):
            # parenthesized proterm or parenthesized iso expression applied
            save = self.i
            try:
                inner = self.parse_proterm()
                self.expect(")")
                if not self.at("{") and not self.at("^-1"):
                    return inner
            except ParseError:
                pass
            self.i = save
            iso = self.parse_isoexpr_paren()
            return self._iso_application(iso, (t.line, t.col))
        if self.accept("["):
            # inline derivation block: [ proctx |- proterm : target ](groups){args}
            slots = self.parse_slots()
            self.expect("|")
            hyps = self.parse_hyps()
            self.expect("|-")
            body = self.parse_proterm()
            self.expect(":")
            target = self.parse_protype()
            self.expect("]")
            groups = self._parse_groups()
            args = self._parse_braced_args()
            return RProterm(
                (t.line, t.col),
                "block",
                "",
                (),
                0,
                None,
                groups,
                None,
                True,
                RProctx((t.line, t.col), slots, hyps),
                target,
                (body,) + args,
            )
        tok = self.ident("proterm")
        if self.at("("):
            groups = self._parse_groups()
            args = self._parse_braced_args()
            return RProterm(
                (tok.line, tok.col), "app", tok.text, (), 0, None, groups, None, True, None, None, args
            )
        if self.at("{") or self.at("^-1"):
            forward = not self.accept("^-1")
            iso = RIso((tok.line, tok.col), "ref", tok.text)
            if not forward:
                iso = RIso((tok.line, tok.col), "inv", "", None, ("", ""), (), (iso,))
            return self._iso_application(iso, (tok.line, tok.col))
        return RProterm((tok.line, tok.col), "var", tok.text)

    def _iso_application(self, iso: RIso, pos: tuple[int, int]) -> RProterm:
        while self.accept("^-1"):
            iso = RIso(pos, "inv", "", None, ("", ""), (), (iso,))
        self.expect("{")
        arg = self.parse_proterm()
        self.expect("}")
        return RProterm(pos, "isoapp", "", (), 0, None, (), iso, True, None, None, (arg,))

    def _parse_groups(self) -> tuple[tuple[RTerm, ...], ...]:
        self.expect("(")
        groups: list[tuple[RTerm, ...]] = []
        current: list[RTerm] = []
        if not self.at(")"):
            while True:
                if self.at(";"):
                    self.next()
                    groups.append(tuple(current))
                    current = []
                    continue
                current.append(self.parse_term())
                if self.accept(","):
                    continue
                if self.accept(";"):
                    groups.append(tuple(current))
                    current = []
                    continue
                break
        groups.append(tuple(current))
        self.expect(")")
        return tuple(groups)

    def _parse_braced_args(self) -> tuple[RProterm, ...]:
        self.expect("{")
        args: list[RProterm] = []
        if not self.at("}"):
            while True:
                args.append(self.parse_proterm())
                if not self.accept(";"):
                    break
        self.expect("}")
        return tuple(args)

    # -- iso expressions

    def parse_isoexpr(self) -> RIso:
        left = self._iso_unit()
        while self.at(">") and self.peek(1).kind == ">":
            self.next()
            self.next()
            right = self._iso_unit()
            # diagrammatic order: left then right
            left = RIso(left.pos, "comp", "", None, ("", ""), (), (left, right))
        return left

    def parse_isoexpr_paren(self) -> RIso:
        self.expect("(")
        iso = self.parse_isoexpr()
        self.expect(")")
        return iso

    def _iso_unit(self) -> RIso:
        atom = self._iso_atom()
        while self.accept("^-1"):
            atom = RIso(atom.pos, "inv", "", None, ("", ""), (), (atom,))
        return atom

    def _iso_atom(self) -> RIso:
        t = self.peek()
        if self.accept("idt"):
            self.expect("(")
            pt = self.parse_protype()
            self.expect(")")
            return RIso((t.line, t.col), "idt", "", pt)
        if self.accept("["):
            fh = self.ident("forward hypothesis")
            self.expect("=>")
            fwd = self.parse_proterm()
            self.expect(",")
            bh = self.ident("backward hypothesis")
            self.expect("=>")
            bwd = self.parse_proterm()
            self.expect("]")
            return RIso((t.line, t.col), "pair", "", None, (fh.text, bh.text), (fwd, bwd))
        if self.at("("):
            return self.parse_isoexpr_paren()
        tok = self.ident("isomorphism")
        return RIso((tok.line, tok.col), "ref", tok.text)

    # -- judgments

    def parse_judgment(self) -> RJudgment:
        t = self.peek()
        if self.accept("type"):
            return RJudgment((t.line, t.col), "type", self.parse_type())
        if self.accept("ctx"):
            return RJudgment((t.line, t.col), "ctx", None, self.parse_ctx())
        if self.accept("proctx"):
            slots = self.parse_slots()
            self.expect("|")
            hyps = self.parse_hyps()
            return RJudgment(
                (t.line, t.col),
                "proctx",
                proctx=RProctx((t.line, t.col), slots, hyps),
            )
        slots = self.parse_slots()
        if self.accept("|"):
            hyps = self.parse_hyps()
            self.expect("|-")
            m = self.parse_proterm()
            if self.accept("=="):
                n2 = self.parse_proterm()
                self.expect(":")
                target = self.parse_protype()
                return RJudgment(
                    (t.line, t.col),
                    "protermeq",
                    proctx=RProctx((t.line, t.col), slots, hyps),
                    proterms=(m, n2),
                    protypes=(target,),
                )
            self.expect(":")
            target = self.parse_protype()
            return RJudgment(
                (t.line, t.col),
                "proterm",
                proctx=RProctx((t.line, t.col), slots, hyps),
                proterms=(m,),
                protypes=(target,),
            )
        self.expect("|-")
        if len(slots) == 1:
            first = self.parse_term()
            if self.accept("=="):
                second = self.parse_term()
                self.expect(":")
                ty = self.parse_type()
                return RJudgment(
                    (t.line, t.col), "termeq", ty, slots[0], None, (first, second)
                )
            if self.at(",") or self.at("/"):
                terms = [first]
                while self.accept(","):
                    terms.append(self.parse_term())
                self.expect("/")
                target = self.parse_ctx()
                return RJudgment(
                    (t.line, t.col), "subst", None, slots[0], target, tuple(terms)
                )
            self.expect(":")
            ty = self.parse_type()
            return RJudgment((t.line, t.col), "term", ty, slots[0], None, (first,))
        if len(slots) == 2:
            first = self.parse_protype()
            if self.accept("=="):
                second = self.parse_protype()
                return RJudgment(
                    (t.line, t.col),
                    "protypeeq",
                    None,
                    slots[0],
                    slots[1],
                    (),
                    (first, second),
                )
            if self.accept("~=~"):
                second = self.parse_protype()
                return RJudgment(
                    (t.line, t.col), "iso", None, slots[0], slots[1], (), (first, second)
                )
            self.accept("protype")
            return RJudgment(
                (t.line, t.col), "protype", None, slots[0], slots[1], (), (first,)
            )
        raise self.err("a judgment without hypotheses takes one or two contexts")

    # -- declarations

    def parse_decl(self) -> RDecl:
        t = self.peek()
        if self.accept("category"):
            name = self.ident("category name")
            return RDecl((t.line, t.col), "category", name.text)
        if self.accept("functor"):
            name = self.ident("functor name")
            self.expect(":")
            src = self.ident("source category")
            self.expect("->")
            tgt = self.ident("target category")
            return RDecl((t.line, t.col), "functor", name.text, (src.text, tgt.text))
        if self.accept("profunctor"):
            name = self.ident("profunctor name")
            self.expect(":")
            src = self.ident("source category")
            self.expect("-|->")
            tgt = self.ident("target category")
            return RDecl((t.line, t.col), "profunctor", name.text, (src.text, tgt.text))
        if self.accept("transformation"):
            name = self.ident("transformation name")
            self.expect(":")
            sig = self._parse_transsig()
            return RDecl((t.line, t.col), "transformation", name.text, (), sig)
        if self.accept("iso"):
            name = self.ident("isomorphism name")
            self.expect(":")
            src = self.ident("left profunctor")
            self.expect("~=~")
            tgt = self.ident("right profunctor")
            return RDecl((t.line, t.col), "iso", name.text, (src.text, tgt.text))
        if self.accept("axiom"):
            if self.accept("term"):
                ctx = self.parse_ctx()
                self.expect("|-")
                lhs = self.parse_term()
                self.expect("==")
                rhs = self.parse_term()
                self.expect(":")
                ty = self.parse_type()
                j = RJudgment((t.line, t.col), "termeq", ty, ctx, None, (lhs, rhs))
                return RDecl((t.line, t.col), "axiom", "", (), None, j)
            self.expect("proterm", "'term' or 'proterm'")
            slots = self.parse_slots()
            self.expect("|")
            hyps = self.parse_hyps()
            self.expect("|-")
            lhs_m = self.parse_proterm()
            self.expect("==")
            rhs_m = self.parse_proterm()
            self.expect(":")
            target = self.parse_protype()
            j = RJudgment(
                (t.line, t.col),
                "protermeq",
                proctx=RProctx((t.line, t.col), slots, hyps),
                proterms=(lhs_m, rhs_m),
                protypes=(target,),
            )
            return RDecl((t.line, t.col), "axiom", "", (), None, j)
        if self.accept("theorem"):
            name = self.ident("theorem name")
            self.expect(":")
            j = self.parse_judgment()
            witness = None
            if self.accept(":="):
                witness = self.parse_isoexpr()
            return RDecl((t.line, t.col), "theorem", name.text, (), None, j, witness)
        if self.accept("check"):
            j = self.parse_judgment()
            return RDecl((t.line, t.col), "check", "", (), None, j)
        raise self.err(f"expected a declaration, found {t.text or t.kind!r}")

    def _parse_transsig(self) -> tuple:
        # sugar form: idents separated by ';' then => ident
        save = self.i
        if self.at("ident") or self.at("."):
            names: list[str] = []
            ok = True
            if self.accept("."):
                pass
            else:
                while True:
                    if not self.at("ident"):
                        ok = False
                        break
                    names.append(self.next().text)
                    if not self.accept(";"):
                        break
            if ok and self.accept("=>"):
                if self.at("ident"):
                    cod = self.next().text
                    return ("chain", tuple(names), cod)
            self.i = save
        slots = self.parse_slots()
        self.expect("|")
        entries: list[RProtype] = []
        if not self.at("=>"):
            while True:
                entries.append(self.parse_protype())
                if not self.accept(";"):
                    break
        self.expect("=>")
        cod_pt = self.parse_protype()
        return ("general", slots, tuple(entries), cod_pt)


def parse_file(text: str, path: str = "<input>") -> SourceFile:
    parser = Parser(tokenize(text))
    decls = []
    while not parser.at("eof"):
        decls.append(parser.parse_decl())
    return SourceFile(path, tuple(decls))


# ---------------------------------------------------------------------------
# resolver: raw trees to core syntax


@dataclass
class ResolveEnv:
    """Declarations in scope plus proven reusable theorems."""

    spec: Specification
    proterm_thms: dict[str, tuple[Procontext, Proterm, Protype]] = field(
        default_factory=dict
    )
    iso_thms: dict[str, "object"] = field(default_factory=dict)  # name -> IsoJudgment


class ResolveError(Exception):
    def __init__(self, message: str, pos: tuple[int, int]):
        super().__init__(f"{pos[0]}:{pos[1]}: {message}")
        self.message = message
        self.pos = pos


def resolve_type(env: ResolveEnv, r: RTy) -> TypeExpr:
    if r.kind == "unit":
        return UNIT
    if r.kind == "base":
        if r.name not in env.spec.sig.categories:
            raise ResolveError(f"undeclared category {r.name!r}", r.pos)
        return BaseT(r.name)
    if r.kind == "prod":
        return ProdT(resolve_type(env, r.parts[0]), resolve_type(env, r.parts[1]))
    raise ResolveError(f"bad type node {r.kind}", r.pos)


def resolve_ctx(env: ResolveEnv, r: RCtx) -> Context:
    seen: set[str] = set()
    entries = []
    for name, ty in r.entries:
        if name in seen:
            raise ResolveError(f"duplicate variable {name!r}", r.pos)
        seen.add(name)
        entries.append((name, resolve_type(env, ty)))
    return Context(tuple(entries))


def resolve_term(env: ResolveEnv, r: RTerm, ctx: Context) -> Term:
    if r.kind == "var":
        idx = ctx.lookup(r.name)
        if idx is None:
            raise ResolveError(f"unbound variable {r.name!r}", r.pos)
        return Var(idx, r.name)
    if r.kind == "unit":
        return UnitTm()
    if r.kind == "pair":
        return Pair(
            resolve_term(env, r.parts[0], ctx), resolve_term(env, r.parts[1], ctx)
        )
    if r.kind == "proj":
        return Proj(r.side, resolve_term(env, r.parts[0], ctx))
    if r.kind == "app":
        if r.name not in env.spec.sig.functors:
            raise ResolveError(f"undeclared functor {r.name!r}", r.pos)
        return FunApp(r.name, resolve_term(env, r.parts[0], ctx))
    raise ResolveError(f"bad term node {r.kind}", r.pos)


def resolve_protype(
    env: ResolveEnv, r: RProtype, gamma: Context, delta: Context
) -> Protype:
    if r.kind == "top":
        return Top()
    if r.kind == "and":
        return And(
            resolve_protype(env, r.parts[0], gamma, delta),
            resolve_protype(env, r.parts[1], gamma, delta),
        )
    if r.kind == "prof":
        if r.name not in env.spec.sig.profunctors:
            raise ResolveError(f"undeclared profunctor {r.name!r}", r.pos)
        return ProfApp(
            r.name,
            resolve_term(env, r.terms[0], gamma),
            resolve_term(env, r.terms[1], delta),
        )
    if r.kind == "ide":
        ty = resolve_type(env, r.ty) if r.ty else UNIT
        return Ide(
            ty,
            resolve_term(env, r.terms[0], gamma),
            resolve_term(env, r.terms[1], delta),
        )
    if r.kind == "tensor":
        ty = resolve_type(env, r.ty) if r.ty else UNIT
        mid = Context(((r.var, ty),))
        return Tensor(
            r.var,
            ty,
            resolve_protype(env, r.parts[0], gamma, mid),
            resolve_protype(env, r.parts[1], mid, delta),
        )
    if r.kind == "filler":
        ty = resolve_type(env, r.ty) if r.ty else UNIT
        bound = Context(((r.var, ty),))
        return Filler(
            r.var,
            ty,
            resolve_protype(env, r.parts[0], bound, gamma),
            resolve_protype(env, r.parts[1], bound, delta),
        )
    raise ResolveError(f"bad protype node {r.kind}", r.pos)


def resolve_proctx(env: ResolveEnv, r: RProctx) -> Procontext:
    slots = tuple(resolve_ctx(env, c) for c in r.slots)
    names: set[str] = set()
    for c in slots:
        for n in c.names():
            if n in names:
                raise ResolveError(
                    f"variable {n!r} appears in two procontext slots", r.pos
                )
            names.add(n)
    hyps = []
    hyp_names: set[str] = set()
    for i, (name, pt) in enumerate(r.hyps):
        if i + 1 >= len(slots):
            raise ResolveError("more hypotheses than slot joins", r.pos)
        if name in hyp_names:
            raise ResolveError(f"duplicate hypothesis {name!r}", r.pos)
        hyp_names.add(name)
        hyps.append((name, resolve_protype(env, pt, slots[i], slots[i + 1])))
    if len(hyps) + 1 != len(slots):
        raise ResolveError(
            f"{len(slots)} contexts need {len(slots) - 1} hypotheses, got {len(hyps)}",
            r.pos,
        )
    return Procontext(slots, tuple(hyps))


class _PResolver:
    """Resolve raw proterms against a procontext, target-directed."""

    def __init__(self, env: ResolveEnv, p: Procontext):
        self.env = env
        self.p = p
        # unique variable names across slots let terms resolve by name
        self.var_slot: dict[str, int] = {}
        for k, c in enumerate(p.slots):
            for n in c.names():
                self.var_slot[n] = k

    def slot_of_term(self, r: RTerm, pos: tuple[int, int]) -> Optional[int]:
        names: set[str] = set()

        def collect(x: RTerm) -> None:
            if x.kind == "var":
                names.add(x.name)
            for sub in x.parts:
                collect(sub)

        collect(r)
        slots = {self.var_slot[n] for n in names if n in self.var_slot}
        if len(slots) > 1:
            raise ResolveError("term mixes variables from different slots", pos)
        return slots.pop() if slots else None

    def resolve(self, r: RProterm, target: Optional[Protype]) -> Proterm:
        env = self.env
        if r.kind == "var":
            return ProVar(r.name)
        if r.kind == "unit":
            return PUnit()
        if r.kind == "pair":
            lt = target.left if isinstance(target, And) else None
            rt = target.right if isinstance(target, And) else None
            return PPair(self.resolve(r.parts[0], lt), self.resolve(r.parts[1], rt))
        if r.kind == "proj":
            return PProj(r.side, self.resolve(r.parts[0], None))
        if r.kind == "refl":
            slot = self.slot_of_term(r.term, r.pos) if r.term else None
            ctx = self.p.slots[slot] if slot is not None else self._only_slot(r.pos)
            return Refl(resolve_term(env, r.term, ctx))
        if r.kind == "tensor":
            lt = target.left if isinstance(target, Tensor) else None
            rt = target.right if isinstance(target, Tensor) else None
            return TensorIntro(self.resolve(r.parts[0], lt), self.resolve(r.parts[1], rt))
        if r.kind == "eval":
            return FillerElim(self.resolve(r.parts[0], None), self.resolve(r.parts[1], None))
        if r.kind == "ind":
            return self._resolve_ind(r, target)
        if r.kind == "split":
            return self._resolve_split(r, target)
        if r.kind == "lam":
            return self._resolve_lam(r, target)
        if r.kind == "app":
            return self._resolve_app(r)
        if r.kind == "isoapp":
            iso, forward = resolve_isoexpr_ref(env, r.iso)
            return IsoApp(iso, forward, self.resolve(r.parts[0], None))
        if r.kind == "block":
            return self._resolve_block(r)
        raise ResolveError(f"bad proterm node {r.kind}", r.pos)

    def _only_slot(self, pos: tuple[int, int]) -> Context:
        if len(self.p.slots) == 1:
            return self.p.slots[0]
        raise ResolveError(
            "cannot determine the slot of a closed term; mention a variable", pos
        )

    def _resolve_ind(self, r: RProterm, target: Optional[Protype]) -> Proterm:
        left, right = r.names
        li = self.var_slot.get(left)
        ri = self.var_slot.get(right)
        if li is None or ri is None or ri != li + 1:
            raise ResolveError(
                f"'ind {left} ~ {right}' needs two adjacent singleton slots", r.pos
            )
        if self.p.hyp_index(r.name) != li:
            raise ResolveError(
                f"hypothesis {r.name!r} does not join {left} and {right}", r.pos
            )
        body_p, _ = sb.merge_ide_slots(self.p, li)
        sub = _PResolver(self.env, body_p)
        body = sub.resolve(r.parts[0], target)
        return IdeElim(r.name, body, left)

    def _resolve_split(self, r: RProterm, target: Optional[Protype]) -> Proterm:
        a, x, b = r.names
        i = self.p.hyp_index(r.name)
        if i is None:
            raise ResolveError(f"unknown hypothesis {r.name!r}", r.pos)
        _, pt = self.p.hyps[i]
        if not isinstance(pt, Tensor):
            raise ResolveError(f"hypothesis {r.name!r} is not a tensor", r.pos)
        for n in (a, x, b):
            if n in self.var_slot or self.p.hyp_index(n) is not None:
                raise ResolveError(f"name {n!r} shadows an existing name", r.pos)
        body_p = sb.split_tensor_slots(self.p, i)
        body_p = Procontext(
            body_p.slots[: i + 1]
            + (Context(((x, pt.ty),)),)
            + body_p.slots[i + 2 :],
            body_p.hyps[:i] + ((a, pt.left), (b, pt.right)) + body_p.hyps[i + 2 :],
        )
        sub = _PResolver(self.env, body_p)
        body = sub.resolve(r.parts[0], target)
        return TensorElim(r.name, a, x, b, body)

    def _resolve_lam(self, r: RProterm, target: Optional[Protype]) -> Proterm:
        var, hyp = r.names
        if not isinstance(target, Filler):
            raise ResolveError(
                "an abstraction needs a filler target protype to resolve against",
                r.pos,
            )
        if var in self.var_slot or self.p.hyp_index(hyp) is not None:
            if var in self.var_slot:
                raise ResolveError(f"variable {var!r} shadows a slot variable", r.pos)
            raise ResolveError(f"hypothesis {hyp!r} shadows an existing one", r.pos)
        bound = Context(((var, target.ty),))
        body_p = Procontext(
            (bound,) + self.p.slots, ((hyp, target.along),) + self.p.hyps
        )
        sub = _PResolver(self.env, body_p)
        body = sub.resolve(r.parts[0], target.target)
        return FillerIntro(var, target.ty, hyp, target.along, body)

    def _group_ctx(self, g: tuple[RTerm, ...], pos: tuple[int, int]) -> Context:
        slots = set()
        for t in g:
            s = self.slot_of_term(t, pos)
            if s is not None:
                slots.add(s)
        if len(slots) > 1:
            raise ResolveError("term group mixes variables from different slots", pos)
        if slots:
            return self.p.slots[slots.pop()]
        return self._only_slot(pos) if len(self.p.slots) == 1 else Context()

    def _resolve_app(self, r: RProterm) -> Proterm:
        env = self.env
        if r.name in env.spec.sig.transformations:
            tsym = env.spec.sig.transformations[r.name]
            if len(r.groups) != len(tsym.contexts):
                raise ResolveError(
                    f"{r.name} takes {len(tsym.contexts)} term groups", r.pos
                )
            groups = []
            for g, tgt_ctx in zip(r.groups, tsym.contexts):
                if len(g) != len(tgt_ctx):
                    raise ResolveError(
                        f"{r.name}: group arity {len(g)} != {len(tgt_ctx)}", r.pos
                    )
                ctx = self._group_ctx(g, r.pos)
                groups.append(tuple(resolve_term(env, t, ctx) for t in g))
            args = tuple(
                self.resolve(a, sb.subst_protype(
                    d,
                    # targets from the instantiated entries
                    # (only used to steer abstraction resolution)
                    _mk_subst(tsym.contexts[i], groups[i]),
                    _mk_subst(tsym.contexts[i + 1], groups[i + 1]),
                ))
                for i, (a, d) in enumerate(zip(r.parts, tsym.domain))
            )
            return TransApp(r.name, tuple(groups), args)
        if r.name in env.proterm_thms:
            inner_p, body, _ = env.proterm_thms[r.name]
            if len(r.groups) != len(inner_p.slots):
                raise ResolveError(
                    f"theorem {r.name} takes {len(inner_p.slots)} term groups", r.pos
                )
            groups = []
            for g, tgt_ctx in zip(r.groups, inner_p.slots):
                if len(g) != len(tgt_ctx):
                    raise ResolveError(
                        f"theorem {r.name}: group arity mismatch", r.pos
                    )
                ctx = self._group_ctx(g, r.pos)
                groups.append(tuple(resolve_term(env, t, ctx) for t in g))
            args = tuple(
                self.resolve(a, sb.subst_protype(
                    pt,
                    _mk_subst(inner_p.slots[i], groups[i]),
                    _mk_subst(inner_p.slots[i + 1], groups[i + 1]),
                ))
                for i, (a, (_, pt)) in enumerate(zip(r.parts, inner_p.hyps))
            )
            if len(args) != len(inner_p.hyps):
                raise ResolveError(
                    f"theorem {r.name} takes {len(inner_p.hyps)} arguments", r.pos
                )
            return Composite(inner_p, body, tuple(groups), args)
        raise ResolveError(
            f"{r.name!r} is not a transformation symbol or proven theorem", r.pos
        )

    def _resolve_block(self, r: RProterm) -> Proterm:
        env = self.env
        inner_p = resolve_proctx(env, r.proctx)
        g0, gn = inner_p.outer()
        target = resolve_protype(env, r.target, g0, gn)
        sub = _PResolver(env, inner_p)
        body = sub.resolve(r.parts[0], target)
        groups = []
        for g, tgt_ctx in zip(r.groups, inner_p.slots):
            if len(g) != len(tgt_ctx):
                raise ResolveError("block group arity mismatch", r.pos)
            ctx = self._group_ctx(g, r.pos)
            groups.append(tuple(resolve_term(env, t, ctx) for t in g))
        if len(groups) != len(inner_p.slots):
            raise ResolveError("block needs one term group per slot", r.pos)
        args = tuple(self.resolve(a, None) for a in r.parts[1:])
        if len(args) != len(inner_p.hyps):
            raise ResolveError("block needs one argument per hypothesis", r.pos)
        return Composite(inner_p, body, tuple(groups), args)


def _mk_subst(target: Context, comps: tuple[Term, ...]):
    from .syntax import TermSubst

    return TermSubst(target, comps)


def resolve_isoexpr_ref(env: ResolveEnv, r: RIso) -> tuple[IsoExpr, bool]:
    """Resolve an iso reference used in proterm application position."""
    if r.kind == "inv":
        inner, fwd = resolve_isoexpr_ref(env, r.parts[0])
        return inner, not fwd
    if r.kind == "ref":
        return _resolve_iso_name(env, r), True
    raise ResolveError("only named isomorphisms apply directly here", r.pos)


def _resolve_iso_name(env: ResolveEnv, r: RIso) -> IsoExpr:
    if r.name in env.spec.isos:
        return SymIso(r.name)
    thm = env.iso_thms.get(r.name)
    if thm is not None:
        return ThmIso(
            r.name, thm.left_ctx, thm.right_ctx, thm.lhs, thm.rhs, thm.witness
        )
    raise ResolveError(f"unknown isomorphism {r.name!r}", r.pos)


def resolve_isoexpr(
    env: ResolveEnv,
    r: RIso,
    gamma: Context,
    delta: Context,
    lhs: Optional[Protype],
    rhs: Optional[Protype],
) -> IsoExpr:
    """Resolve an iso expression against its judgment sides."""
    if r.kind == "ref":
        return _resolve_iso_name(env, r)
    if r.kind == "inv":
        return InvIso(resolve_isoexpr(env, r.parts[0], gamma, delta, rhs, lhs))
    if r.kind == "idt":
        pt = resolve_protype(env, r.protype, gamma, delta)
        return IdIso(pt)
    if r.kind == "pair":
        if lhs is None or rhs is None:
            raise ResolveError(
                "a pairing witness needs known sides; name the step as a theorem",
                r.pos,
            )
        fh, bh = r.hyps
        p_f = Procontext((gamma, delta), ((fh, lhs),))
        p_b = Procontext((gamma, delta), ((bh, rhs),))
        fwd = _PResolver(env, p_f).resolve(r.proterms[0], rhs)
        bwd = _PResolver(env, p_b).resolve(r.proterms[1], lhs)
        return PairIso(fh, fwd, bh, bwd)
    if r.kind == "comp":
        # diagrammatic: parts[0] applies first
        first_r, second_r = r.parts
        first = resolve_isoexpr(env, first_r, gamma, delta, lhs, None)
        mid: Optional[Protype] = None
        if lhs is not None:
            from .checker import CheckError, DEFAULT_CONFIG, apply_iso_protype

            try:
                mid = apply_iso_protype(
                    env.spec, first, True, lhs, gamma, delta, DEFAULT_CONFIG
                )
            except CheckError:
                mid = None
        second = resolve_isoexpr(env, second_r, gamma, delta, mid, rhs)
        return CompIso(second, first)
    raise ResolveError(f"bad iso node {r.kind}", r.pos)


# ---------------------------------------------------------------------------
# pretty-printer


def _uniquify(names: Sequence[str], used: set[str], stem: str = "x") -> list[str]:
    out = []
    for n in names:
        cand = n or stem
        while cand in used:
            cand += "'"
        used.add(cand)
        out.append(cand)
    return out


def print_type(ty: TypeExpr) -> str:
    if isinstance(ty, BaseT):
        return ty.name
    if isinstance(ty, UnitT):
        return "1"
    if isinstance(ty, ProdT):
        return f"({print_type(ty.left)} * {print_type(ty.right)})"
    raise TypeError(str(ty))


def print_ctx(ctx: Context) -> str:
    if len(ctx) == 0:
        return "."
    return ", ".join(f"{n}:{print_type(t)}" for n, t in ctx.entries)


def print_term(t: Term, ctx: Context) -> str:
    if isinstance(t, Var):
        if 0 <= t.index < len(ctx):
            return ctx.names()[t.index]
        return t.hint or f"#{t.index}"
    if isinstance(t, UnitTm):
        return "<>"
    if isinstance(t, Pair):
        return f"<{print_term(t.fst, ctx)}, {print_term(t.snd, ctx)}>"
    if isinstance(t, Proj):
        return f"{print_term(t.body, ctx)}.{t.side}"
    if isinstance(t, FunApp):
        return f"{t.sym}({print_term(t.arg, ctx)})"
    raise TypeError(str(t))


def print_protype(
    pt: Protype, gamma: Context, delta: Context, used: Optional[set[str]] = None
) -> str:
    used = used if used is not None else set(gamma.names()) | set(delta.names())
    if isinstance(pt, Top):
        return "T"
    if isinstance(pt, And):
        return (
            f"({print_protype(pt.left, gamma, delta, used)}"
            f" /\\ {print_protype(pt.right, gamma, delta, used)})"
        )
    if isinstance(pt, ProfApp):
        return f"{pt.sym}({print_term(pt.left, gamma)}; {print_term(pt.right, delta)})"
    if isinstance(pt, Ide):
        return (
            f"{print_term(pt.left, gamma)} ={print_type(pt.ty)}= "
            f"{print_term(pt.right, delta)}"
        )
    if isinstance(pt, Tensor):
        (v,) = _uniquify([pt.var], set(used))
        mid = Context(((v, pt.ty),))
        inner_used = used | {v}
        return (
            f"({print_protype(pt.left, gamma, mid, inner_used)}"
            f" ({v}:{print_type(pt.ty)})@ "
            f"{print_protype(pt.right, mid, delta, inner_used)})"
        )
    if isinstance(pt, Filler):
        (v,) = _uniquify([pt.var], set(used))
        bound = Context(((v, pt.ty),))
        inner_used = used | {v}
        return (
            f"({print_protype(pt.along, bound, gamma, inner_used)}"
            f" ({v}:{print_type(pt.ty)})|> "
            f"{print_protype(pt.target, bound, delta, inner_used)})"
        )
    raise TypeError(str(pt))


def print_proctx(p: Procontext) -> str:
    slots = " ; ".join(print_ctx(c) for c in p.slots)
    hyps = "; ".join(
        f"{n} : {print_protype(pt, p.slots[i], p.slots[i + 1])}"
        for i, (n, pt) in enumerate(p.hyps)
    )
    return f"{slots} | {hyps}"


class ProtermPrinter:
    def __init__(self, p: Procontext, spec: Optional[Specification] = None):
        self.p = p
        self.spec = spec
        self.used = {n for c in p.slots for n in c.names()} | set(p.hyp_names())

    def print(self, m: Proterm, lo: int, hi: int) -> str:
        p = self.p
        pos = sb.hyp_positions(p)
        if isinstance(m, ProVar):
            return m.name
        if isinstance(m, PUnit):
            return "<>"
        if isinstance(m, PPair):
            return f"<{self.print(m.fst, lo, hi)}, {self.print(m.snd, lo, hi)}>"
        if isinstance(m, PProj):
            return f"{self.print(m.body, lo, hi)}.{m.side}"
        if isinstance(m, Refl):
            return f"refl({print_term(m.term, p.slots[lo])})"
        if isinstance(m, TransApp):
            parts = sb.partitions(m.args, lo, hi, pos) if m.args else [[]]
            part = parts[0] if parts else []
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            gs = "; ".join(
                ", ".join(print_term(t, p.slots[b]) for t in g)
                for g, b in zip(m.groups, bounds)
            )
            ms = "; ".join(
                self.print(a, s, e) for a, (s, e) in zip(m.args, part)
            )
            return f"{m.sym}({gs}){{{ms}}}"
        if isinstance(m, TensorIntro):
            parts = sb.partitions([m.left, m.right], lo, hi, pos)
            (ls, le), (rs, re) = parts[0]
            return f"({self.print(m.left, ls, le)} @ {self.print(m.right, rs, re)})"
        if isinstance(m, FillerElim):
            parts = sb.partitions([m.arg, m.fun], lo, hi, pos)
            (ls, le), (rs, re) = parts[0]
            return f"({self.print(m.arg, ls, le)} |> {self.print(m.fun, rs, re)})"
        if isinstance(m, IdeElim):
            i = pos[m.hyp]
            left = p.slots[i].names()[0]
            right = p.slots[i + 1].names()[0]
            body_p, _ = sb.merge_ide_slots(p, i)
            sub = ProtermPrinter(body_p, self.spec)
            return f"ind {left} ~ {right} by {m.hyp} in {sub.print(m.body, lo, hi - 1)}"
        if isinstance(m, TensorElim):
            i = pos[m.hyp]
            _, pt = p.hyps[i]
            assert isinstance(pt, Tensor)
            a, x, b = _uniquify([m.left, pt.var, m.right], set(self.used))
            body_p = sb.split_tensor_slots(p, i)
            body_p = Procontext(
                body_p.slots[: i + 1]
                + (Context(((x, pt.ty),)),)
                + body_p.slots[i + 2 :],
                body_p.hyps[:i] + ((a, pt.left), (b, pt.right)) + body_p.hyps[i + 2 :],
            )
            body = sb.rename_provars(m.body, {m.left: a, m.right: b})
            sub = ProtermPrinter(body_p, self.spec)
            return (
                f"split {m.hyp} as {a} @ {x} @ {b} in "
                f"{sub.print(body, lo, hi + 1)}"
            )
        if isinstance(m, FillerIntro):
            v, h = _uniquify([m.var, m.hyp], set(self.used))
            sliced = p.sub(lo, hi)
            body_p = sb.filler_intro_body_proctx(sliced, v, m.ty, h, m.along)
            body = sb.rename_provars(m.body, {m.hyp: h}) if h != m.hyp else m.body
            sub = ProtermPrinter(body_p, self.spec)
            return f"\\({v}, {h}). {sub.print(body, 0, len(body_p.hyps))}"
        if isinstance(m, IsoApp):
            inv = "" if m.forward else "^-1"
            iso_s = print_isoexpr(m.iso, p.slots[lo], p.slots[hi], spec=self.spec)
            if isinstance(m.iso, (CompIso, PairIso)):
                iso_s = f"({iso_s})"
            return f"{iso_s}{inv}{{{self.print(m.arg, lo, hi)}}}"
        if isinstance(m, Composite):
            parts = (
                sb.partitions(list(m.bindings), lo, hi, pos) if m.bindings else [[]]
            )
            part = parts[0] if parts else []
            bounds = [lo] + [e for (_, e) in part] if part else [lo]
            inner_printer = ProtermPrinter(m.inner, self.spec)
            g0, gn = m.inner.outer()
            target_s = "T"
            if self.spec is not None:
                from .checker import CheckError, infer_proterm

                try:
                    target = infer_proterm(self.spec, m.inner, m.body)
                    target_s = print_protype(target, g0, gn)
                except CheckError:
                    pass
            body_s = inner_printer.print(m.body, 0, len(m.inner.hyps))
            head = f"[ {print_proctx(m.inner)} |- {body_s} : {target_s} ]"
            gs = "; ".join(
                ", ".join(print_term(t, p.slots[b]) for t in g)
                for g, b in zip(m.subst, bounds)
            )
            bs = "; ".join(self.print(b, s, e) for b, (s, e) in zip(m.bindings, part))
            return f"{head}({gs}){{{bs}}}"
        raise TypeError(str(m))


def print_proterm(
    m: Proterm, p: Procontext, spec: Optional[Specification] = None
) -> str:
    return ProtermPrinter(p, spec).print(m, 0, len(p.hyps))


def print_isoexpr(
    w: IsoExpr,
    gamma: Context,
    delta: Context,
    lhs: Optional[Protype] = None,
    rhs: Optional[Protype] = None,
    spec: Optional[Specification] = None,
) -> str:
    if isinstance(w, (SymIso, ThmIso)):
        return w.name
    if isinstance(w, IdIso):
        return f"idt({print_protype(w.protype, gamma, delta)})"
    if isinstance(w, InvIso):
        inner = print_isoexpr(w.inner, gamma, delta, rhs, lhs, spec)
        if isinstance(w.inner, (SymIso, ThmIso, IdIso)):
            return f"{inner}^-1"
        return f"({inner})^-1"
    if isinstance(w, CompIso):
        return (
            f"{print_isoexpr(w.before, gamma, delta, lhs, None, spec)}"
            f" >> {print_isoexpr(w.after, gamma, delta, None, rhs, spec)}"
        )
    if isinstance(w, PairIso):
        p_f = Procontext((gamma, delta), ((w.fwd_hyp, lhs if lhs is not None else Top()),))
        p_b = Procontext((gamma, delta), ((w.bwd_hyp, rhs if rhs is not None else Top()),))
        return (
            f"[{w.fwd_hyp} => {print_proterm(w.fwd, p_f, spec)}, "
            f"{w.bwd_hyp} => {print_proterm(w.bwd, p_b, spec)}]"
        )
    raise TypeError(str(w))
