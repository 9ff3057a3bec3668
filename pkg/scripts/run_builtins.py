#!/usr/bin/env python3
"""Run the refinement trace on every built-in problem and print a summary.

Artifacts (summary.json, iterations/, component.csv) land in
<out>/<problem>/ via the same code path as the command-line entry point.

Usage: python3 scripts/run_builtins.py [--out DIR] [--seed N] [--max-iters N]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from fptrace.cli import main as cli_main
from fptrace.problems import builtin_names


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs", help="output root directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-iters", type=int, default=6)
    args = parser.parse_args()

    root = Path(args.out)
    root.mkdir(parents=True, exist_ok=True)
    rows = []
    worst = 0
    for name in builtin_names():
        out_dir = root / name
        cfg = out_dir.with_suffix(".cfg")
        cfg.write_text(f"problem = {name}\nmax_iters = {args.max_iters}\n")
        t0 = time.monotonic()
        code = cli_main(["--config", str(cfg), "--out", str(out_dir),
                         "--seed", str(args.seed)])
        elapsed = time.monotonic() - t0
        worst = max(worst, code)
        summary = json.loads((out_dir / "summary.json").read_text())
        rows.append((name, code, summary["n_iterations"],
                     summary["final_n_rects"], summary["residual_max"],
                     summary["coverage_gap"], elapsed))

    print(f"{'problem':<20} {'exit':>4} {'iters':>5} {'rects':>6} "
          f"{'residual':>10} {'gap':>8} {'time':>7}")
    for name, code, iters, rects, res, gap, elapsed in rows:
        print(f"{name:<20} {code:>4} {iters:>5} {rects:>6} "
              f"{res:>10.4g} {gap:>8.4g} {elapsed:>6.1f}s")
    return worst


if __name__ == "__main__":
    sys.exit(main())
