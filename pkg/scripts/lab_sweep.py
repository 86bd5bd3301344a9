#!/usr/bin/env python3
"""Run the finite-equipment law suites over a range of size bounds and
print a small table of instance counts."""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fvdbltt.cli import main as cli_main


def run(max_size: int) -> None:
    print(f"== size bound {max_size}")
    start = time.perf_counter()
    code = cli_main(["lab", "--max-size", str(max_size)])
    print(f"   elapsed {time.perf_counter() - start:.2f}s, exit {code}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--up-to", type=int, default=3)
    args = ap.parse_args()
    for n in range(args.up_to + 1):
        run(n)
