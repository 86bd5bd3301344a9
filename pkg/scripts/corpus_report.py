#!/usr/bin/env python3
"""Check the bundled corpus and model-check it, printing one line per
theorem with timing, and a soundness summary per file."""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fvdbltt.cli import CORPUS_FILES, corpus_path
from fvdbltt.interp import check_soundness, enumerate_environments
from fvdbltt.session import run_file

total_start = time.perf_counter()
for name in CORPUS_FILES:
    session, report, error = run_file(str(corpus_path(name)))
    if error:
        print(f"{name}: load error: {error}")
        continue
    for item in report.items:
        print(f"{name:24s} {item.name:12s} {item.status:7s} {item.elapsed*1000:7.1f}ms")
    envs = bad = 0
    for env in enumerate_environments(session.spec, max_size=2, sample_count=25):
        envs += 1
        for oname, kind, record in session.obligations:
            if not check_soundness(session.spec, env, kind, record).ok:
                bad += 1
    print(f"{name:24s} {'soundness':12s} {envs} environments, {bad} counterexamples")
print(f"total {time.perf_counter() - total_start:.2f}s")
