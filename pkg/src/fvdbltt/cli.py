"""Command-line front door.

Subcommands: ``check`` (files), ``corpus`` (the bundled worked
examples), ``lab`` (exhaustive finite-equipment suites),
``model-check`` (semantic validation over enumerated environments), and
``ufd`` (unfold isomorphism symbols).  Exit codes: 0 all checks pass,
1 check failure, 2 parse or scope error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Optional

from .checker import RewriteConfig
from .session import Report, ReportItem, Session, run_file

CORPUS_FILES = [
    "yoneda.fvt",
    "coyoneda.fvt",
    "fubini.fvt",
    "functor-iso.fvt",
    "adjunction.fvt",
    "leftkan.fvt",
    "kan-composition.fvt",
]


def corpus_path(name: str) -> Path:
    return Path(str(resources.files("fvdbltt").joinpath("corpus", name)))


def load_config_file(path: Optional[str]) -> dict:
    out: dict = {}
    if not path:
        return out
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SystemExit(f"config: {e}")
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise SystemExit(f"config: bad line {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def make_config(args) -> RewriteConfig:
    cfg = load_config_file(getattr(args, "config", None))
    fuel = args.fuel if args.fuel is not None else int(cfg.get("fuel", 1000))
    max_size = (
        args.max_size if args.max_size is not None else int(cfg.get("max-size", 10000))
    )
    return RewriteConfig(fuel=fuel, max_size=max_size)


def get_seed(args) -> int:
    cfg = load_config_file(getattr(args, "config", None))
    return args.seed if args.seed is not None else int(cfg.get("seed", 0))


def emit_report(path: str, report: Report, as_json: bool, error: Optional[str]) -> None:
    if as_json:
        record = {
            "file": path,
            "status": "error" if error else ("ok" if report.all_ok else "fail"),
            "items": [item.json() for item in report.items],
        }
        if error:
            record["error"] = error
        print(json.dumps(record, indent=2))
        return
    if error:
        print(f"error: {error}")
    for item in report.items:
        line = f"  {item.status:8s} {item.kind:10s} {item.name}"
        if item.details:
            line += f"  ({item.details})"
        print(line)
    counts = report.counts
    print(
        f"  -- {counts['ok']} ok, {counts['fail']} fail, "
        f"{counts['unknown']} unknown"
    )


def cmd_check(args) -> int:
    cfg = make_config(args)
    worst = 0
    for path in args.files:
        session, report, error = run_file(path, cfg)
        if not args.json:
            print(path)
        emit_report(path, report, args.json, error)
        if error:
            worst = max(worst, 2)
        elif not report.all_ok:
            worst = max(worst, 1)
    return worst


def cmd_corpus(args) -> int:
    cfg = make_config(args)
    seed = get_seed(args)
    worst = 0
    records = []
    for name in CORPUS_FILES:
        path = str(corpus_path(name))
        session, report, error = run_file(path, cfg)
        if error:
            worst = max(worst, 2)
        elif not report.all_ok:
            worst = max(worst, 1)
        if args.model_check and session is not None and report.all_ok:
            from .interp import check_soundness, enumerate_environments

            checked = 0
            for env in enumerate_environments(
                session.spec,
                max_size=args.max_size_model,
                seed=seed,
                sample_count=args.samples,
            ):
                checked += 1
                for oname, kind, record in session.obligations:
                    v = check_soundness(session.spec, env, kind, record)
                    if not v.ok:
                        report.items.append(
                            ReportItem(
                                f"{oname}@{env.describe()}",
                                "soundness",
                                "fail",
                                0.0,
                                v.reason,
                            )
                        )
                        worst = max(worst, 1)
            report.items.append(
                ReportItem(
                    f"model-check[{checked} environments]",
                    "soundness",
                    "ok",
                    0.0,
                )
            )
        if args.json:
            records.append(
                {
                    "file": name,
                    "status": "error" if error else ("ok" if report.all_ok else "fail"),
                    "items": [item.json() for item in report.items],
                    **({"error": error} if error else {}),
                }
            )
        else:
            print(name)
            emit_report(name, report, False, error)
    if args.json:
        print(json.dumps(records, indent=2))
    return worst


def cmd_lab(args) -> int:
    from . import relmodel as rm

    n = args.max_size
    checks = args.check or [
        "units",
        "composites",
        "bc",
        "frobenius",
        "frobenius-axiom",
        "tabulators",
        "sandwich",
    ]
    failures = 0
    sets = [rm.FinSet(k) for k in range(n + 1)]

    def report_line(name: str, count: int, bad: int) -> None:
        nonlocal failures
        failures += bad
        status = "ok" if bad == 0 else "FAIL"
        print(f"  {status:4s} {name}: {count} instances, {bad} failures")

    for check in checks:
        count = bad = 0
        if check == "units":
            for i in sets:
                for j in sets:
                    for a in rm.all_relations(i, j):
                        count += 1
                        if (
                            rm.rel_compose(rm.rel_unit(i), a) != a
                            or rm.rel_compose(a, rm.rel_unit(j)) != a
                        ):
                            bad += 1
        elif check == "composites":
            for i in sets:
                for j in sets:
                    for k in sets:
                        for a in rm.all_relations(i, j):
                            for b in rm.all_relations(j, k):
                                count += 1
                                comp = rm.rel_compose(a, b)
                                for c in rm.all_relations(i, k):
                                    lhs = rm.exists_cell(
                                        rm.identity_fun(i),
                                        rm.identity_fun(k),
                                        [a, b],
                                        c,
                                    )
                                    rhs = rm.rel_leq(comp, c)
                                    if lhs != rhs:
                                        bad += 1
                if i.size >= 2:
                    break  # keep the composite sweep at desk scale
        elif check == "bc":
            for a in sets:
                for b in sets:
                    for c in sets:
                        for f in rm.all_functions(a, c):
                            for g in rm.all_functions(b, c):
                                count += 1
                                sq = rm.canonical_pullback(f, g)
                                if not rm.beck_chevalley_check(sq).ok:
                                    bad += 1
        elif check == "frobenius":
            for i in sets:
                for j in sets:
                    for f in rm.all_functions(i, j):
                        count += 1
                        if not rm.frobenius_reciprocity_check(f).ok:
                            bad += 1
        elif check == "frobenius-axiom":
            for i in sets:
                count += 1
                if not rm.frobenius_axiom_check(i).ok:
                    bad += 1
        elif check == "tabulators":
            for i in sets:
                for j in sets:
                    for a in rm.all_relations(i, j):
                        count += 1
                        _, _, _, effective = rm.tabulator(a)
                        if not effective or not rm.tabulator_universal_check(a, 2).ok:
                            bad += 1
        elif check == "sandwich":
            import random

            rng = random.Random(get_seed(args))
            small = [rm.FinSet(k) for k in range(min(n, 2) + 1)]
            for _ in range(args.samples):
                szs = [rng.choice(small) for _ in range(4)]
                tops = [rng.choice(small) for _ in range(4)]
                funs = []
                ok = True
                for s, t in zip(tops, szs):
                    if t.size == 0 and s.size > 0:
                        ok = False
                        break
                    funs.append(
                        rm.FinFun(
                            s, t, tuple(rng.randrange(t.size) for _ in range(s.size))
                        )
                    )
                if not ok:
                    continue
                alphas = tuple(
                    rm.FinRel(
                        szs[k],
                        szs[k + 1],
                        rng.getrandbits(szs[k].size * szs[k + 1].size),
                    )
                    for k in range(3)
                )
                count += 1
                if not rm.sandwich_check(alphas, tuple(funs)).ok:
                    bad += 1
        else:
            print(f"  unknown check {check!r}")
            return 2
        report_line(check, count, bad)
    return 0 if failures == 0 else 1


def cmd_model_check(args) -> int:
    from .interp import check_soundness, enumerate_environments

    cfg = make_config(args)
    seed = get_seed(args)
    worst = 0
    for path in args.files:
        session, report, error = run_file(path, cfg)
        if error:
            print(f"error: {error}")
            return 2
        if not report.all_ok:
            print(f"{path}: syntactic checks failed; not model-checking")
            emit_report(path, report, args.json, None)
            return 1
        envs = 0
        bad = 0
        for env in enumerate_environments(
            session.spec,
            max_size=args.max_size_model,
            seed=seed,
            exhaustive=True if args.exhaustive else None,
            sample_count=args.samples,
        ):
            envs += 1
            for name, kind, record in session.obligations:
                v = check_soundness(session.spec, env, kind, record)
                if not v.ok:
                    bad += 1
                    print(f"  counterexample: {name} in [{env.describe()}]: {v.reason}")
        status = "ok" if bad == 0 and envs > 0 else ("vacuous" if envs == 0 else "fail")
        if args.json:
            print(
                json.dumps(
                    {
                        "file": path,
                        "environments": envs,
                        "counterexamples": bad,
                        "status": status,
                    }
                )
            )
        else:
            print(f"{path}: {envs} environments, {bad} counterexamples [{status}]")
        if bad:
            worst = max(worst, 1)
    return worst


def cmd_ufd(args) -> int:
    from .ufd_file import translate_file

    cfg = make_config(args)
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    try:
        out = translate_file(text, args.file, cfg)
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        print(out, end="")
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fvdbltt",
        description="checker and finite-model laboratory for the virtual "
        "double category type theory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=False, sizes=True):
        p.add_argument("--fuel", type=int, default=None, help="rewrite budget")
        if sizes:
            p.add_argument(
                "--max-size", dest="max_size", type=int, default=None,
                help="rewrite size bound",
            )
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", action="store_true")
        p.add_argument("--config", default=None, help="key=value config file")
        if model:
            p.add_argument(
                "--max-size-model",
                type=int,
                default=3,
                help="carrier size bound for environments",
            )
            p.add_argument("--samples", type=int, default=100)
            p.add_argument("--exhaustive", action="store_true")

    p = sub.add_parser("check", help="check declaration files")
    common(p)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("corpus", help="run the bundled corpus")
    common(p, model=True)
    p.add_argument(
        "--model-check",
        action="store_true",
        help="also validate semantically over enumerated environments",
    )
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("lab", help="finite-equipment law suites")
    common(p, sizes=False)
    p.add_argument("--max-size", dest="max_size", type=int, default=3)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument(
        "--check",
        action="append",
        choices=[
            "units",
            "composites",
            "bc",
            "frobenius",
            "frobenius-axiom",
            "tabulators",
            "sandwich",
        ],
    )
    p.set_defaults(func=cmd_lab)

    p = sub.add_parser("model-check", help="semantic validation of a file")
    common(p, model=True)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_model_check)

    p = sub.add_parser("ufd", help="unfold isomorphism symbols")
    common(p)
    p.add_argument("file")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_ufd)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
