"""Interpretation of judgments in the finite relation model.

Types become finite sets (products lexicographically encoded), terms
become functions, protypes become relations: the path protype is the
reindexed equality relation, the tensor the relational composite, and
the filler the right extension.  The model is locally preordered, so a
proterm judgment is valid exactly when the implication between the
interpreted frame and target holds; proterm identity is semantically
irrelevant, and the syntactic engine stays the sole judge of proterm
equality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from .checker import OK, Verdict, fail
from .relmodel import (
    FinFun,
    FinRel,
    FinSet,
    all_functions,
    all_relations,
    exists_cell,
    identity_fun,
    rel_and,
    rel_compose,
    rel_from_pairs,
    rel_full,
    rel_restrict,
    rel_unit,
    right_extension,
)
from .syntax import (
    And,
    BaseT,
    Context,
    Filler,
    FunApp,
    Ide,
    Pair,
    ProdT,
    ProfApp,
    Procontext,
    Proj,
    Protype,
    Proterm,
    Specification,
    Tensor,
    Term,
    Top,
    TypeExpr,
    UnitT,
    UnitTm,
    Var,
)


@dataclass
class Environment:
    categories: dict[str, FinSet] = field(default_factory=dict)
    functors: dict[str, FinFun] = field(default_factory=dict)
    profunctors: dict[str, FinRel] = field(default_factory=dict)

    def describe(self) -> str:
        parts = [f"{n}:{s.size}" for n, s in sorted(self.categories.items())]
        parts += [f"{n}={f}" for n, f in sorted(self.functors.items())]
        parts += [f"{n}={r}" for n, r in sorted(self.profunctors.items())]
        return ", ".join(parts)


class InterpError(Exception):
    pass


# ---------------------------------------------------------------------------
# types, contexts, terms


def type_size(env: Environment, ty: TypeExpr) -> int:
    if isinstance(ty, BaseT):
        s = env.categories.get(ty.name)
        if s is None:
            raise InterpError(f"unassigned category {ty.name!r}")
        return s.size
    if isinstance(ty, UnitT):
        return 1
    if isinstance(ty, ProdT):
        return type_size(env, ty.left) * type_size(env, ty.right)
    raise InterpError(f"unknown type {ty}")


def interp_type(env: Environment, ty: TypeExpr) -> FinSet:
    return FinSet(type_size(env, ty))


def interp_ctx(env: Environment, ctx: Context) -> FinSet:
    n = 1
    for _, ty in ctx:
        n *= type_size(env, ty)
    return FinSet(n)


def ctx_decode(env: Environment, ctx: Context, idx: int) -> list[int]:
    """Left-major decoding of a context element into per-entry values."""
    sizes = [type_size(env, ty) for _, ty in ctx]
    out = [0] * len(sizes)
    for k in range(len(sizes) - 1, -1, -1):
        out[k] = idx % sizes[k]
        idx //= sizes[k]
    return out


def eval_term(
    env: Environment,
    spec: Specification,
    ctx: Context,
    t: Term,
    values: list[int],
) -> tuple[int, TypeExpr]:
    """Value and type of a term at an assignment of context values."""
    if isinstance(t, Var):
        return values[t.index], ctx.types()[t.index]
    if isinstance(t, UnitTm):
        return 0, UnitT()
    if isinstance(t, Pair):
        a, ta = eval_term(env, spec, ctx, t.fst, values)
        b, tb = eval_term(env, spec, ctx, t.snd, values)
        return a * type_size(env, tb) + b, ProdT(ta, tb)
    if isinstance(t, Proj):
        v, ty = eval_term(env, spec, ctx, t.body, values)
        if not isinstance(ty, ProdT):
            raise InterpError("projection of non-product")
        rs = type_size(env, ty.right)
        return (v // rs, ty.left) if t.side == 0 else (v % rs, ty.right)
    if isinstance(t, FunApp):
        fn = env.functors.get(t.sym)
        if fn is None:
            raise InterpError(f"unassigned functor {t.sym!r}")
        v, _ = eval_term(env, spec, ctx, t.arg, values)
        return fn(v), BaseT(spec.sig.functors[t.sym][1])
    raise InterpError(f"eval_term on {t}")


def interp_term(
    env: Environment, spec: Specification, ctx: Context, t: Term
) -> FinFun:
    from .checker import infer_term

    dom = interp_ctx(env, ctx)
    cod = interp_type(env, infer_term(spec, ctx, t))
    table = []
    for idx in dom:
        values = ctx_decode(env, ctx, idx)
        v, _ = eval_term(env, spec, ctx, t, values)
        table.append(v)
    return FinFun(dom, cod, tuple(table))


# ---------------------------------------------------------------------------
# protypes and proterm validity


def interp_protype(
    env: Environment,
    spec: Specification,
    gamma: Context,
    delta: Context,
    pt: Protype,
) -> FinRel:
    gset = interp_ctx(env, gamma)
    dset = interp_ctx(env, delta)
    if isinstance(pt, Top):
        return rel_full(gset, dset)
    if isinstance(pt, And):
        return rel_and(
            interp_protype(env, spec, gamma, delta, pt.left),
            interp_protype(env, spec, gamma, delta, pt.right),
        )
    if isinstance(pt, ProfApp):
        rel = env.profunctors.get(pt.sym)
        if rel is None:
            raise InterpError(f"unassigned profunctor {pt.sym!r}")
        return rel_restrict(
            rel,
            interp_term(env, spec, gamma, pt.left),
            interp_term(env, spec, delta, pt.right),
        )
    if isinstance(pt, Ide):
        return rel_restrict(
            rel_unit(interp_type(env, pt.ty)),
            interp_term(env, spec, gamma, pt.left),
            interp_term(env, spec, delta, pt.right),
        )
    if isinstance(pt, Tensor):
        mid = Context(((pt.var or "x", pt.ty),))
        return rel_compose(
            interp_protype(env, spec, gamma, mid, pt.left),
            interp_protype(env, spec, mid, delta, pt.right),
        )
    if isinstance(pt, Filler):
        bound = Context(((pt.var or "x", pt.ty),))
        return right_extension(
            interp_protype(env, spec, bound, gamma, pt.along),
            interp_protype(env, spec, bound, delta, pt.target),
        )
    raise InterpError(f"unknown protype {pt}")


def frame_valid(
    env: Environment,
    spec: Specification,
    p: Procontext,
    target: Protype,
) -> bool:
    """Cell existence for the interpreted globular frame."""
    row = [
        interp_protype(env, spec, p.slots[i], p.slots[i + 1], pt)
        for i, (_, pt) in enumerate(p.hyps)
    ]
    g0 = interp_ctx(env, p.slots[0])
    gn = interp_ctx(env, p.slots[-1])
    tgt = interp_protype(env, spec, p.slots[0], p.slots[-1], target)
    return exists_cell(identity_fun(g0), identity_fun(gn), row, tgt)


def interp_proterm_valid(
    env: Environment,
    spec: Specification,
    p: Procontext,
    m: Proterm,
    target: Protype,
) -> bool:
    # the model is proof-irrelevant: only the frame matters
    return frame_valid(env, spec, p, target)


# ---------------------------------------------------------------------------
# environment validation and enumeration


def validate_environment(env: Environment, spec: Specification) -> Verdict:
    """Shapes match declarations, all assumed cells exist, axioms hold."""
    sig = spec.sig
    for name in sig.categories:
        if name not in env.categories:
            return fail(f"category {name!r} unassigned")
    for name, (src, tgt) in sig.functors.items():
        fn = env.functors.get(name)
        if fn is None:
            return fail(f"functor {name!r} unassigned")
        if fn.dom != env.categories[src] or fn.cod != env.categories[tgt]:
            return fail(f"functor {name!r} has the wrong shape")
    for name, (left, right) in sig.profunctors.items():
        rel = env.profunctors.get(name)
        if rel is None:
            return fail(f"profunctor {name!r} unassigned")
        if rel.left != env.categories[left] or rel.right != env.categories[right]:
            return fail(f"profunctor {name!r} has the wrong shape")
    for name, tsym in sig.transformations.items():
        p = Procontext(
            tsym.contexts,
            tuple((f"h{i}", pt) for i, pt in enumerate(tsym.domain)),
        )
        if not frame_valid(env, spec, p, tsym.codomain):
            return fail(f"transformation {name!r} has no cell in this model")
    for name, (lname, rname) in spec.isos.items():
        if env.profunctors[lname] != env.profunctors[rname]:
            return fail(f"iso {name!r}: sides differ in this model")
    for ax in spec.term_axioms:
        lhs = interp_term(env, spec, ax.context, ax.lhs)
        rhs = interp_term(env, spec, ax.context, ax.rhs)
        if lhs != rhs:
            return fail(f"term axiom {ax.name or ''} fails")
    for ax in spec.proterm_axioms:
        if not frame_valid(env, spec, ax.proctx, ax.protype):
            return fail(f"proterm axiom {ax.name or ''} frame is invalid")
    return OK


def enumerate_environments(
    spec: Specification,
    max_size: int = 3,
    seed: int = 0,
    exhaustive: Optional[bool] = None,
    sample_count: int = 100,
    forced: Optional[dict[str, Callable[[Environment], object]]] = None,
    include_empty: bool = True,
    budget: int = 250_000,
) -> Iterator[Environment]:
    """Valid environments: exhaustive at desk scale, else seeded samples.

    Exhaustive enumeration is used for at most two category symbols (the
    documented bound) unless the assignment space exceeds the budget.
    ``forced`` maps symbol names to builders computing their assignment
    from the partially built environment (used to hit constrained models
    such as extensions); a builder may return None to reject.
    """
    forced = forced or {}
    sig = spec.sig
    cats = sorted(sig.categories)
    funs = sorted(n for n in sig.functors if n not in forced)
    iso_forced = {r: l for l, r in spec.isos.values()}
    profs = sorted(
        n for n in sig.profunctors if n not in forced and n not in iso_forced
    )
    if exhaustive is None:
        exhaustive = len(cats) <= 2
    if exhaustive:
        space = 1
        sizes_range = range(0 if include_empty else 1, max_size + 1)
        for _ in cats:
            space *= len(list(sizes_range))
        if space and _assignment_space(spec, max_size) > budget:
            exhaustive = False
    if exhaustive:
        yield from _exhaustive_envs(
            spec, cats, funs, profs, iso_forced, forced, max_size, include_empty
        )
    else:
        yield from _sampled_envs(
            spec, cats, funs, profs, iso_forced, forced, max_size, seed, sample_count
        )


def _assignment_space(spec: Specification, max_size: int) -> int:
    total = 1
    n = max_size
    for _, (src, tgt) in spec.sig.functors.items():
        total *= n ** n
        if total > 10 ** 9:
            return total
    for _ in spec.sig.profunctors:
        total *= 2 ** (n * n)
        if total > 10 ** 9:
            return total
    return total


def _exhaustive_envs(
    spec, cats, funs, profs, iso_forced, forced, max_size, include_empty
) -> Iterator[Environment]:
    from itertools import product as iproduct

    lo = 0 if include_empty else 1
    for sizes in iproduct(range(lo, max_size + 1), repeat=len(cats)):
        base = Environment({c: FinSet(s) for c, s in zip(cats, sizes)})
        yield from _fill_env(spec, base, funs, profs, iso_forced, forced, None)


def _sampled_envs(
    spec, cats, funs, profs, iso_forced, forced, max_size, seed, count
) -> Iterator[Environment]:
    rng = random.Random(seed)
    produced = 0
    attempts = 0
    while produced < count and attempts < count * 200:
        attempts += 1
        env = Environment(
            {c: FinSet(rng.randint(1, max_size)) for c in cats}
        )
        ok = True
        for name in funs:
            src, tgt = spec.sig.functors[name]
            dom, cod = env.categories[src], env.categories[tgt]
            if cod.size == 0 and dom.size > 0:
                ok = False
                break
            env.functors[name] = FinFun(
                dom, cod, tuple(rng.randrange(cod.size) for _ in range(dom.size))
            )
        if not ok:
            continue
        for name in sorted(forced):
            value = forced[name](env)
            if value is None:
                ok = False
                break
            _assign(env, spec, name, value)
        if not ok:
            continue
        for name in profs:
            l, r = spec.sig.profunctors[name]
            ls, rs = env.categories[l], env.categories[r]
            env.profunctors[name] = FinRel(
                ls, rs, rng.getrandbits(ls.size * rs.size)
            )
        for rname, lname in iso_forced.items():
            env.profunctors[rname] = env.profunctors[lname]
        if validate_environment(env, spec).ok:
            produced += 1
            yield env


def _assign(env: Environment, spec: Specification, name: str, value) -> None:
    if name in spec.sig.functors:
        env.functors[name] = value
    elif name in spec.sig.profunctors:
        env.profunctors[name] = value
    else:
        env.categories[name] = value


def _fill_env(
    spec, base: Environment, funs, profs, iso_forced, forced, rng
) -> Iterator[Environment]:
    """Depth-first exhaustive assignment with early rejection."""

    def go_funs(env: Environment, k: int) -> Iterator[Environment]:
        if k == len(funs):
            env2 = Environment(
                dict(env.categories), dict(env.functors), dict(env.profunctors)
            )
            ok = True
            for name in sorted(forced):
                value = forced[name](env2)
                if value is None:
                    ok = False
                    break
                _assign(env2, spec, name, value)
            if not ok:
                return
            # validate the purely functional assumptions before relations
            if _functional_cells_ok(env2, spec):
                yield from go_profs(env2, 0)
            return
        name = funs[k]
        src, tgt = spec.sig.functors[name]
        for fn in all_functions(env.categories[src], env.categories[tgt]):
            env.functors[name] = fn
            yield from go_funs(env, k + 1)
        env.functors.pop(name, None)

    def go_profs(env: Environment, k: int) -> Iterator[Environment]:
        if k == len(profs):
            out = Environment(
                dict(env.categories), dict(env.functors), dict(env.profunctors)
            )
            for rname, lname in iso_forced.items():
                out.profunctors[rname] = out.profunctors[lname]
            if validate_environment(out, spec).ok:
                yield out
            return
        name = profs[k]
        l, r = spec.sig.profunctors[name]
        for rel in all_relations(env.categories[l], env.categories[r]):
            env.profunctors[name] = rel
            yield from go_profs(env, k + 1)
        env.profunctors.pop(name, None)

    yield from go_funs(base, 0)


def _functional_cells_ok(env: Environment, spec: Specification) -> bool:
    """Check the assumed cells and axioms that mention no profunctors."""

    def mentions_prof(pt: Protype) -> bool:
        if isinstance(pt, ProfApp):
            return True
        if isinstance(pt, And):
            return mentions_prof(pt.left) or mentions_prof(pt.right)
        if isinstance(pt, Tensor):
            return mentions_prof(pt.left) or mentions_prof(pt.right)
        if isinstance(pt, Filler):
            return mentions_prof(pt.along) or mentions_prof(pt.target)
        return False

    for name, tsym in spec.sig.transformations.items():
        if any(mentions_prof(pt) for pt in tsym.domain + (tsym.codomain,)):
            continue
        p = Procontext(
            tsym.contexts,
            tuple((f"h{i}", pt) for i, pt in enumerate(tsym.domain)),
        )
        if not frame_valid(env, spec, p, tsym.codomain):
            return False
    for ax in spec.term_axioms:
        if interp_term(env, spec, ax.context, ax.lhs) != interp_term(
            env, spec, ax.context, ax.rhs
        ):
            return False
    return True


# ---------------------------------------------------------------------------
# the soundness harness


def check_soundness(
    spec: Specification, env: Environment, kind: str, record
) -> Verdict:
    """Semantic validity of one checked judgment in one environment."""
    try:
        if kind == "proterm":
            p, m, target = record
            if interp_proterm_valid(env, spec, p, m, target):
                return OK
            return fail("interpreted frame implication fails")
        if kind == "iso":
            lhs = interp_protype(env, spec, record.left_ctx, record.right_ctx, record.lhs)
            rhs = interp_protype(env, spec, record.left_ctx, record.right_ctx, record.rhs)
            if lhs == rhs:
                return OK
            return fail(f"interpretations differ: {lhs} vs {rhs}")
        if kind == "termeq":
            ctx, s, t = record
            if interp_term(env, spec, ctx, s) == interp_term(env, spec, ctx, t):
                return OK
            return fail("interpreted functions differ")
        if kind == "protypeeq":
            gamma, delta, a, b = record
            if interp_protype(env, spec, gamma, delta, a) == interp_protype(
                env, spec, gamma, delta, b
            ):
                return OK
            return fail("interpreted relations differ")
        if kind == "protermeq":
            p, target = record
            if frame_valid(env, spec, p, target):
                return OK
            return fail("equality frame is not valid")
    except InterpError as e:
        return fail(str(e))
    return OK  # judgments without semantic content (wf checks)
