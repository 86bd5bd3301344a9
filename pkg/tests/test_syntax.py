"""Core syntax: alpha equality, free variables, signature validation."""

import pytest

from fvdbltt.gen import Gen
from fvdbltt.syntax import (
    BaseT,
    Context,
    Filler,
    FillerElim,
    FunApp,
    Ide,
    Pair,
    ProdT,
    ProfApp,
    Proj,
    ProVar,
    Signature,
    Tensor,
    TransSym,
    UnitTm,
    Var,
    alpha_equal,
    chain_transform,
    free_vars,
    validate_signature,
)


def test_terms_compare_up_to_hints():
    assert Pair(Var(0, "x"), Var(1, "y")) == Pair(Var(0, "u"), Var(1, "v"))
    assert Proj(0, Var(0)) != Proj(1, Var(0))


def test_contexts_compare_by_types():
    a = Context((("x", BaseT("I")), ("y", BaseT("J"))))
    b = Context((("u", BaseT("I")), ("v", BaseT("J"))))
    assert a == b
    assert hash(a) == hash(b)


def test_filler_alpha_renaming():
    i = BaseT("I")
    body = ProfApp("al", Var(0, "x"), Var(0, "k"))
    f1 = Filler("x", i, Ide(i, Var(0, "x"), Var(0, "y")), body)
    f2 = Filler("z", i, Ide(i, Var(0, "z"), Var(0, "y")), body)
    assert alpha_equal(f1, f2)


def test_alpha_equivalence_relation_on_random_cells():
    g = Gen(seed=11)
    for _ in range(60):
        _, _, m = g.cell(4)
        assert alpha_equal(m, m)
    # symmetry/transitivity on renamed variants
    from fvdbltt.subst import rename_provars

    for _ in range(60):
        p, _, m = g.cell(4)
        names = p.hyp_names()
        if not names:
            continue
        ren = {n: n + "_r" for n in names}
        m2 = rename_provars(m, ren)
        back = rename_provars(m2, {v: k for k, v in ren.items()})
        assert alpha_equal(m, back)


def test_free_vars_term():
    t = FunApp("f", Var(0, "x"))
    assert free_vars(t) == ({0}, set())


def test_free_vars_tensor_excludes_binder():
    i = BaseT("I")
    pt = Tensor(
        "x", i, ProfApp("p", Var(0, "y"), Var(0, "x")), ProfApp("q", Var(0, "x"), Var(0, "z"))
    )
    tvs, pvs = free_vars(pt)
    assert tvs == {(0, 0), (1, 0)}
    assert pvs == set()


def test_free_vars_filler_elim_provars():
    m = FillerElim(ProVar("a"), ProVar("e"))
    assert free_vars(m) == (set(), {"a", "e"})


def test_validate_signature_self_consistent():
    sig = Signature(frozenset({"I"}), {"f": ("I", "I")}, {}, {})
    assert validate_signature(sig) == []


def test_validate_signature_dangling_category():
    sig = Signature(frozenset({"I"}), {"f": ("I", "J")}, {}, {})
    diags = validate_signature(sig)
    assert any(d.code == "UndeclaredCategory" and "J" in d.message for d in diags)


def test_chain_transform_mismatch_rejected():
    sig = Signature(
        frozenset({"I", "J", "K"}),
        {},
        {"rho": ("I", "J"), "omega": ("K", "K"), "theta": ("I", "K")},
        {},
    )
    with pytest.raises(ValueError):
        chain_transform(sig, ("rho", "omega"), "theta")


def test_signature_accepts_model_export():
    from fvdbltt.relmodel import FinSet
    from fvdbltt.synvdc import FinRelModel, associated_specification

    spec, _ = associated_specification(FinRelModel((FinSet(2),)), bound=2)
    assert validate_signature(spec.sig) == []
