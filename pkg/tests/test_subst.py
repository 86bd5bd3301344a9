"""Substitution clauses and the four substitution laws on random input.

The acceptance suite runs the laws at the full advertised count; here a
few hundred instances keep the signal with a fast default run.
"""

import pytest

from fvdbltt import subst as sb
from fvdbltt.checker import check_proterm
from fvdbltt.gen import Gen
from fvdbltt.rewrite import normalize_proterm
from fvdbltt.syntax import (
    And,
    BaseT,
    Context,
    Ide,
    Pair,
    PPair,
    ProfApp,
    Procontext,
    Proj,
    ProVar,
    PProj,
    PUnit,
    TermSubst,
    Top,
    TransApp,
    UnitTm,
    Var,
    alpha_equal,
)


I = BaseT("A")


def test_subst_variable_clause():
    s = TermSubst(Context((("x", ProdT0()),)), (Pair(Var(0, "a"), Var(1, "b")),))
    assert sb.subst_term(Var(0, "x"), s) == Pair(Var(0), Var(1))


def ProdT0():
    from fvdbltt.syntax import ProdT

    return ProdT(I, I)


def test_subst_unit_clause():
    s = TermSubst(Context((("x", I),)), (Var(3),))
    assert sb.subst_term(UnitTm(), s) == UnitTm()


def test_subst_no_reduction():
    # substitution does not beta-reduce; normalization is separate
    s = TermSubst(Context((("x", ProdT0()),)), (Pair(Var(0, "u"), Var(1, "v")),))
    from fvdbltt.syntax import FunApp

    out = sb.subst_term(FunApp("f", Proj(0, Var(0, "x"))), s)
    assert out == FunApp("f", Proj(0, Pair(Var(0), Var(1))))


def test_subst_protype_clauses():
    gamma = Context((("x", I),))
    delta = Context((("y", I),))
    s = TermSubst(gamma, (Var(0, "u"),))
    t = TermSubst(delta, (Var(0, "v"),))
    assert sb.subst_protype(Top(), s, t) == Top()
    pt = And(Top(), ProfApp("r", Var(0), Var(0)))
    out = sb.subst_protype(pt, s, t)
    assert isinstance(out, And)
    ide = Ide(I, Var(0, "x"), Var(0, "y"))
    from fvdbltt.syntax import FunApp

    s2 = TermSubst(gamma, (FunApp("ff", Var(0, "u")),))
    out2 = sb.subst_protype(ide, s2, t)
    assert out2 == Ide(I, FunApp("ff", Var(0)), Var(0))


def test_prosubst_provariable_clause():
    gamma = Context((("x", I),))
    delta = Context((("y", I),))
    alpha = ProfApp("r", Var(0), Var(0))
    p = Procontext((gamma, delta), (("a", alpha),))
    binding = (p, PPair(ProVar("a"), PUnit()))
    newp, out = sb.prosubst(p, ProVar("a"), [binding])
    assert alpha_equal(out, PPair(ProVar("a"), PUnit()))


def test_prosubst_pairing_and_unit_clauses():
    gamma = Context((("x", I),))
    delta = Context((("y", I),))
    alpha = ProfApp("r", Var(0), Var(0))
    p = Procontext((gamma, delta), (("a", alpha),))
    ident = (Procontext((gamma, delta), (("b", alpha),)), ProVar("b"))
    _, out = sb.prosubst(p, PPair(ProVar("a"), PUnit()), [ident])
    assert alpha_equal(out, PPair(ProVar("b"), PUnit()))
    _, out2 = sb.prosubst(p, PUnit(), [ident])
    assert out2 == PUnit()


def _slotwise(g, p):
    subs, sources = [], []
    for c in p.slots:
        src = g.inhabited_context()
        s = g.subst(src, c)
        if s is None:
            return None
        sources.append(src)
        subs.append(s)
    return subs, sources


def _substituted_proctx(p, subs, sources):
    return Procontext(
        tuple(sources),
        tuple(
            (n, sb.subst_protype(pt, subs[i], subs[i + 1]))
            for i, (n, pt) in enumerate(p.hyps)
        ),
    )


@pytest.mark.parametrize("seed", [0, 1])
def test_law_protype_double_substitution(seed):
    g = Gen(seed=seed)
    done = 0
    while done < 150:
        gamma, delta = g.inhabited_context(), g.inhabited_context()
        alpha = g.protype(gamma, delta, 2)
        g1, d1 = g.inhabited_context(), g.inhabited_context()
        s1, t1 = g.subst(g1, gamma), g.subst(d1, delta)
        g2, d2 = g.inhabited_context(), g.inhabited_context()
        if s1 is None or t1 is None:
            continue
        s2, t2 = g.subst(g2, g1), g.subst(d2, d1)
        if s2 is None or t2 is None:
            continue
        done += 1
        lhs = sb.subst_protype(sb.subst_protype(alpha, s1, t1), s2, t2)
        rhs = sb.subst_protype(
            alpha, sb.compose_subst(s2, s1), sb.compose_subst(t2, t1)
        )
        assert lhs == rhs


@pytest.mark.parametrize("seed", [2, 3])
def test_law_proterm_double_substitution(seed):
    g = Gen(seed=seed)
    done = 0
    while done < 120:
        p, tau, m = g.cell(3)
        got = _slotwise(g, p)
        if got is None:
            continue
        subs1, sources1 = got
        p1 = _substituted_proctx(p, subs1, sources1)
        got2 = _slotwise(g, p1)
        if got2 is None:
            continue
        subs2, sources2 = got2
        done += 1
        m12 = sb.subst_proterm(
            p1, sb.subst_proterm(p, m, subs1, sources1), subs2, sources2
        )
        composed = [sb.compose_subst(s2, s1) for s1, s2 in zip(subs1, subs2)]
        mc = sb.subst_proterm(p, m, composed, sources2)
        if alpha_equal(m12, mc):
            continue
        p2 = _substituted_proctx(p, composed, sources2)
        tau2 = sb.subst_protype(tau, composed[0], composed[-1])
        n12 = normalize_proterm(g.spec, p2, m12, tau2)
        nc = normalize_proterm(g.spec, p2, mc, tau2)
        assert alpha_equal(n12, nc), f"{m}\n{n12}\n{nc}"


def _bindings_for(g, p):
    """Random bindings for every hypothesis of p, built from the frame."""
    out = []
    for i, (name, pt) in enumerate(p.hyps):
        gamma, delta = p.slots[i], p.slots[i + 1]
        fresh = g.fresh("b")
        style = g.rng.choice(["var", "wrap"])
        q = Procontext((gamma, delta), ((fresh, pt),))
        if style == "var":
            out.append((q, ProVar(fresh)))
        else:
            out.append((q, PProj(0, PPair(ProVar(fresh), PUnit()))))
    return out


@pytest.mark.parametrize("seed", [4, 5])
def test_law_double_prosubstitution(seed):
    g = Gen(seed=seed)
    done = 0
    while done < 120:
        p, tau, m = g.cell(3)
        bindings1 = _bindings_for(g, p)
        p1, m1 = sb.prosubst(p, m, bindings1)
        bindings2 = _bindings_for(g, p1)
        p2, m12 = sb.prosubst(p1, m1, bindings2)
        # compose the bindings: each first-level binding has one hypothesis
        composed = []
        for (q, nu), (q2, nu2) in zip(bindings1, bindings2):
            _, c = sb.prosubst(q, nu, [(q2, nu2)])
            composed.append((q2, c))
        _, mc = sb.prosubst(p, m, composed)
        done += 1
        if alpha_equal(m12, mc):
            continue
        n12 = normalize_proterm(g.spec, p2, m12, tau)
        nc = normalize_proterm(g.spec, p2, mc, tau)
        assert alpha_equal(n12, nc), f"{m}\n{n12}\n{nc}"


@pytest.mark.parametrize("seed", [6, 7])
def test_law_prosubstitution_commutes_with_substitution(seed):
    g = Gen(seed=seed)
    done = 0
    while done < 120:
        p, tau, m = g.cell(3)
        bindings = _bindings_for(g, p)
        newp, cut = sb.prosubst(p, m, bindings)
        got = _slotwise(g, newp)
        if got is None:
            continue
        subs, sources = got
        done += 1
        lhs = sb.subst_proterm(newp, cut, subs, sources)
        # boundary substitutions act on the outer proterm; each binding
        # receives its own slice (all bindings are single-hypothesis)
        outer_subs = subs  # one hypothesis per binding: slices == subs
        substituted_bindings = []
        for i, (q, nu) in enumerate(bindings):
            sl = [subs[i], subs[i + 1]]
            so = [sources[i], sources[i + 1]]
            q2 = Procontext(
                (sources[i], sources[i + 1]),
                ((q.hyps[0][0], sb.subst_protype(q.hyps[0][1], sl[0], sl[1])),),
            )
            substituted_bindings.append((q2, sb.subst_proterm(q, nu, sl, so)))
        m_outer = sb.subst_proterm(p, m, subs, sources)
        p_sub = _substituted_proctx(p, subs, sources)
        _, rhs = sb.prosubst(p_sub, m_outer, substituted_bindings)
        if alpha_equal(lhs, rhs):
            continue
        tau2 = sb.subst_protype(tau, subs[0], subs[-1])
        p2 = _substituted_proctx(p, subs, sources)
        nl = normalize_proterm(g.spec, p2, lhs, tau2)
        nr = normalize_proterm(g.spec, p2, rhs, tau2)
        assert alpha_equal(nl, nr), f"{m}\n{nl}\n{nr}"


@pytest.mark.parametrize("seed", [8])
def test_substitution_preserves_typing(seed):
    g = Gen(seed=seed)
    done = 0
    while done < 100:
        p, tau, m = g.cell(3)
        got = _slotwise(g, p)
        if got is None:
            continue
        subs, sources = got
        done += 1
        m2 = sb.subst_proterm(p, m, subs, sources)
        p2 = _substituted_proctx(p, subs, sources)
        tau2 = sb.subst_protype(tau, subs[0], subs[-1])
        assert check_proterm(g.spec, p2, m2, tau2).ok
