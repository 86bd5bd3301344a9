"""The cartesian equipment of finite sets, functions, and relations.

Relations are boolean matrices packed row-major into a single int; all
existential and universal checks are exhaustive loops over the finite
carriers.  This module provides the desk-scale verifiers for the
structure laws: unit and composite formulas, companions and conjoints,
Beck-Chevalley pullbacks, Frobenius reciprocity and the Frobenius
diagonal square, tabulators, and the extension search for left Kan
extensions of functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Optional

from .checker import OK, Verdict, fail


@dataclass(frozen=True)
class FinSet:
    size: int

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("negative size")

    def __iter__(self) -> Iterator[int]:
        return iter(range(self.size))

    def __str__(self) -> str:
        return f"[{self.size}]"


@dataclass(frozen=True)
class FinFun:
    dom: FinSet
    cod: FinSet
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.table) != self.dom.size:
            raise ValueError("table length != domain size")
        if any(not 0 <= v < self.cod.size for v in self.table):
            raise ValueError("table value out of range")

    def __call__(self, x: int) -> int:
        return self.table[x]

    def then(self, other: "FinFun") -> "FinFun":
        if other.dom != self.cod:
            raise ValueError("composition shape mismatch")
        return FinFun(self.dom, other.cod, tuple(other.table[v] for v in self.table))

    def __str__(self) -> str:
        return f"[{', '.join(map(str, self.table))}]"


def identity_fun(s: FinSet) -> FinFun:
    return FinFun(s, s, tuple(range(s.size)))


def all_functions(dom: FinSet, cod: FinSet) -> Iterator[FinFun]:
    if dom.size == 0:
        yield FinFun(dom, cod, ())
        return
    if cod.size == 0:
        return
    for table in product(range(cod.size), repeat=dom.size):
        yield FinFun(dom, cod, table)


@dataclass(frozen=True)
class FinRel:
    left: FinSet
    right: FinSet
    bits: int  # row-major: bit (i * right.size + j) set iff i related to j

    def __post_init__(self) -> None:
        if self.bits < 0 or self.bits >> (self.left.size * self.right.size):
            raise ValueError("bits out of range")

    def holds(self, i: int, j: int) -> bool:
        return bool(self.bits >> (i * self.right.size + j) & 1)

    def pairs(self) -> Iterator[tuple[int, int]]:
        for i in self.left:
            for j in self.right:
                if self.holds(i, j):
                    yield (i, j)

    def transpose(self) -> "FinRel":
        return rel_from_pairs(self.right, self.left, [(j, i) for i, j in self.pairs()])

    def __str__(self) -> str:
        return "{" + ", ".join(f"({i},{j})" for i, j in self.pairs()) + "}"


def rel_from_pairs(
    left: FinSet, right: FinSet, pairs: Iterator | list
) -> FinRel:
    bits = 0
    for i, j in pairs:
        bits |= 1 << (i * right.size + j)
    return FinRel(left, right, bits)


def rel_full(left: FinSet, right: FinSet) -> FinRel:
    n = left.size * right.size
    return FinRel(left, right, (1 << n) - 1)


def rel_empty(left: FinSet, right: FinSet) -> FinRel:
    return FinRel(left, right, 0)


def rel_and(a: FinRel, b: FinRel) -> FinRel:
    if (a.left, a.right) != (b.left, b.right):
        raise ValueError("meet shape mismatch")
    return FinRel(a.left, a.right, a.bits & b.bits)


def rel_leq(a: FinRel, b: FinRel) -> bool:
    if (a.left, a.right) != (b.left, b.right):
        raise ValueError("comparison shape mismatch")
    return a.bits & ~b.bits == 0


def all_relations(left: FinSet, right: FinSet) -> Iterator[FinRel]:
    n = left.size * right.size
    for bits in range(1 << n):
        yield FinRel(left, right, bits)


# ---------------------------------------------------------------------------
# the structure maps


def rel_unit(s: FinSet) -> FinRel:
    """The unit loose arrow: the image of the full predicate under the
    diagonal, which is the equality relation."""
    return rel_from_pairs(s, s, ((i, i) for i in s))


def rel_compose(a: FinRel, b: FinRel) -> FinRel:
    """(i, k) related iff some middle j witnesses both halves."""
    if a.right != b.left:
        raise ValueError("composition shape mismatch")
    return rel_from_pairs(
        a.left,
        b.right,
        (
            (i, k)
            for i in a.left
            for k in b.right
            if any(a.holds(i, j) and b.holds(j, k) for j in a.right)
        ),
    )


def rel_restrict(a: FinRel, f: FinFun, g: FinFun) -> FinRel:
    """Pullback of the relation along the product of the functions."""
    if f.cod != a.left or g.cod != a.right:
        raise ValueError("restriction shape mismatch")
    return rel_from_pairs(
        f.dom,
        g.dom,
        ((i, j) for i in f.dom for j in g.dom if a.holds(f(i), g(j))),
    )


def rel_oprestrict(a: FinRel, f: FinFun, g: FinFun) -> FinRel:
    """Direct image along the product of the functions."""
    if f.dom != a.left or g.dom != a.right:
        raise ValueError("oprestriction shape mismatch")
    return rel_from_pairs(f.cod, g.cod, ((f(i), g(j)) for i, j in a.pairs()))


def companion(f: FinFun) -> FinRel:
    return rel_restrict(rel_unit(f.cod), f, identity_fun(f.cod))


def conjoint(f: FinFun) -> FinRel:
    return rel_restrict(rel_unit(f.cod), identity_fun(f.cod), f)


def right_extension(along: FinRel, target: FinRel) -> FinRel:
    """(j, k) related iff every x with along(x, j) has target(x, k)."""
    if along.left != target.left:
        raise ValueError("extension shape mismatch")
    return rel_from_pairs(
        along.right,
        target.right,
        (
            (j, k)
            for j in along.right
            for k in target.right
            if all(
                target.holds(x, k) for x in along.left if along.holds(x, j)
            )
        ),
    )


def exists_cell(
    s: FinFun, t: FinFun, row: list[FinRel], target: FinRel
) -> bool:
    """Cell existence: every tuple satisfying the row lands in the target.

    The row chains left to right; s maps the leftmost carrier into the
    target's left side and t the rightmost into its right side.
    """
    carriers = [s.dom] + [r.right for r in row]
    if row:
        if row[0].left != s.dom:
            raise ValueError("row does not start at the cell's left corner")
        for a, b in zip(row, row[1:]):
            if a.right != b.left:
                raise ValueError("row does not chain")
        if row[-1].right != t.dom:
            raise ValueError("row does not end at the cell's right corner")
    elif s.dom != t.dom:
        raise ValueError("empty row needs equal corners")
    if s.cod != target.left or t.cod != target.right:
        raise ValueError("target shape mismatch")

    def tuples(k: int, x: int) -> Iterator[list[int]]:
        if k == len(row):
            yield [x]
            return
        for y in row[k].right:
            if row[k].holds(x, y):
                for rest in tuples(k + 1, y):
                    yield [x] + rest

    for x0 in s.dom:
        for tup in tuples(0, x0):
            if not target.holds(s(tup[0]), t(tup[-1])):
                return False
    return True


# ---------------------------------------------------------------------------
# squares, Beck-Chevalley, Frobenius


@dataclass(frozen=True)
class PullbackSquare:
    """A commuting square whose apex is the canonical pullback.

    ``left: P -> A`` and ``top: P -> B`` are the projections;
    ``bottom: A -> C`` and ``right: B -> C`` the cospan legs.
    """

    left: FinFun
    top: FinFun
    bottom: FinFun
    right: FinFun

    def __post_init__(self) -> None:
        if self.left.dom != self.top.dom:
            raise ValueError("projections must share the apex")
        if self.bottom.cod != self.right.cod:
            raise ValueError("legs must share the target")
        if self.bottom.dom != self.left.cod or self.right.dom != self.top.cod:
            raise ValueError("square does not typecheck")
        for p in self.left.dom:
            if self.bottom(self.left(p)) != self.right(self.top(p)):
                raise ValueError("square does not commute")
        expected = [
            (a, b)
            for a in self.bottom.dom
            for b in self.right.dom
            if self.bottom(a) == self.right(b)
        ]
        got = sorted((self.left(p), self.top(p)) for p in self.left.dom)
        if len(got) != len(set(got)) or got != sorted(expected):
            raise ValueError("apex is not the canonical pullback")


def canonical_pullback(bottom: FinFun, right: FinFun) -> PullbackSquare:
    pairs = [
        (a, b)
        for a in bottom.dom
        for b in right.dom
        if bottom(a) == right(b)
    ]
    apex = FinSet(len(pairs))
    left = FinFun(apex, bottom.dom, tuple(a for a, _ in pairs))
    top = FinFun(apex, right.dom, tuple(b for _, b in pairs))
    return PullbackSquare(left, top, bottom, right)


def beck_chevalley_check(sq: PullbackSquare) -> Verdict:
    """The square's opspan image of the unit equals the cospan's span.

    Checked in both orientations of the square.
    """
    for s, t, f, g in (
        (sq.left, sq.top, sq.bottom, sq.right),
        (sq.top, sq.left, sq.right, sq.bottom),
    ):
        apex_span = rel_oprestrict(rel_unit(s.dom), s, t)
        cospan = rel_compose(companion(f), conjoint(g))
        if apex_span != cospan:
            return fail(
                f"direct image {apex_span} differs from composite {cospan}"
            )
    return OK


def frobenius_reciprocity_check(f: FinFun) -> Verdict:
    """Image of a meet with a reindexed predicate equals the meet of the
    image, exhaustively over all predicates on both sides."""
    dom, cod = f.dom, f.cod
    for abits in range(1 << dom.size):
        for bbits in range(1 << cod.size):
            lhs = set()
            for x in dom:
                if abits >> x & 1 and bbits >> f(x) & 1:
                    lhs.add(f(x))
            rhs = {f(x) for x in dom if abits >> x & 1} & {
                y for y in cod if bbits >> y & 1
            }
            if lhs != rhs:
                return fail(f"fails at predicate pair ({abits:b}, {bbits:b})")
    return OK


def frobenius_square(s: FinSet) -> PullbackSquare:
    """The diagonal square whose Beck-Chevalley property is the Frobenius
    axiom for the object."""
    n = s.size
    prod2 = FinSet(n * n)
    prod3 = FinSet(n * n * n)
    diag = FinFun(s, prod2, tuple(i * n + i for i in s))
    left_leg = FinFun(prod2, prod3, tuple((a // n) * n * n + (a // n) * n + (a % n) for a in prod2))
    right_leg = FinFun(prod2, prod3, tuple((a // n) * n * n + (a % n) * n + (a % n) for a in prod2))
    sq = canonical_pullback(left_leg, right_leg)
    # the canonical apex must be the diagonal copy of the object
    if sq.left.dom.size != n:
        raise ValueError("frobenius square apex is not the object")
    return sq


def frobenius_axiom_check(s: FinSet) -> Verdict:
    return beck_chevalley_check(frobenius_square(s))


# ---------------------------------------------------------------------------
# tabulators, proneness, supineness


def tabulator(a: FinRel) -> tuple[FinSet, FinFun, FinFun, bool]:
    """The extent span of the relation, with its effectiveness flag."""
    pairs = list(a.pairs())
    ext = FinSet(len(pairs))
    p0 = FinFun(ext, a.left, tuple(i for i, _ in pairs))
    p1 = FinFun(ext, a.right, tuple(j for _, j in pairs))
    # effectiveness: the tabulating cell is supine, i.e. the direct
    # image of the unit on the extent recovers the relation
    effective = rel_oprestrict(rel_unit(ext), p0, p1) == a
    return ext, p0, p1, effective


def tabulator_universal_check(a: FinRel, max_probe: int = 3) -> Verdict:
    """Every span admitting a cell into the relation factors uniquely
    through the extent span."""
    ext, p0, p1, _ = tabulator(a)
    for n in range(max_probe + 1):
        x = FinSet(n)
        for s in all_functions(x, a.left):
            for t in all_functions(x, a.right):
                if not all(a.holds(s(i), t(i)) for i in x):
                    continue
                factors = []
                for u in all_functions(x, ext):
                    if u.then(p0) == s and u.then(p1) == t:
                        factors.append(u)
                if len(factors) != 1:
                    return fail(
                        f"span over {n} elements has {len(factors)} factorizations"
                    )
    return OK


def is_prone_cell(
    gamma: FinRel, alpha: FinRel, f: FinFun, g: FinFun, max_probe: int = 2
) -> bool:
    """The cell gamma <= alpha[f;g] is cartesian: any cell into alpha
    through (f.u, g.v) factors through gamma."""
    if not rel_leq(gamma, rel_restrict(alpha, f, g)):
        return False
    for n in range(max_probe + 1):
        probe = FinSet(n)
        for u in all_functions(probe, f.dom):
            for v in all_functions(probe, g.dom):
                for delta in all_relations(probe, probe):
                    if rel_leq(delta, rel_restrict(alpha, u.then(f), v.then(g))):
                        if not rel_leq(delta, rel_restrict(gamma, u, v)):
                            return False
    return True


def is_supine_cell(beta: FinRel, target: FinRel, f: FinFun, g: FinFun) -> bool:
    """The cell beta => target over (f, g) is opcartesian: the target is
    exactly the direct image."""
    return target == rel_oprestrict(beta, f, g)


def sandwich_check(
    alphas: tuple[FinRel, FinRel, FinRel],
    funs: tuple[FinFun, FinFun, FinFun, FinFun],
) -> Verdict:
    """Prone-supine-prone rows compose to a prone cell.

    ``alphas`` are the three lower loose arrows; the middle upper arrow
    is chosen free, the outer uppers are the canonical restrictions, and
    the middle cell is the canonical supine one over (funs[1], funs[2]).
    """
    a1, a2, a3 = alphas
    f0, f1, f2, f3 = funs
    g1 = rel_restrict(a1, f0, f1)
    g3 = rel_restrict(a3, f2, f3)
    for g2 in all_relations(FinSet(f1.dom.size), FinSet(f2.dom.size)):
        mid_target = rel_oprestrict(g2, f1, f2)
        if mid_target != a2:
            continue
        comp_top = rel_compose(rel_compose(g1, g2), g3)
        comp_bottom = rel_compose(rel_compose(a1, a2), a3)
        if not is_prone_cell(comp_top, comp_bottom, f0, f3, max_probe=2):
            return fail(
                f"composite of prone-supine-prone not prone at {g2}"
            )
    return OK


def adjoint_check(t: FinFun, u: FinFun) -> bool:
    """t(x) = y exactly when x = u(y): mutually inverse bijections."""
    if t.dom != u.cod or t.cod != u.dom:
        return False
    return companion(t) == conjoint(u)


def find_left_kan(f: FinFun, g: FinFun) -> Optional[FinFun]:
    """The function whose companion is the right extension of f's
    companion along g's companion, when that extension is a graph."""
    if f.dom != g.dom:
        raise ValueError("extension shape mismatch")
    ext = right_extension(companion(g), companion(f))
    table = []
    for z in g.cod:
        images = [y for y in f.cod if ext.holds(z, y)]
        if len(images) != 1:
            return None
        table.append(images[0])
    return FinFun(g.cod, f.cod, tuple(table))
