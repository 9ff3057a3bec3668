#!/usr/bin/env python3
"""Scan the smoothed coordination game for its fold structure.

For each parameter value x on a uniform scan, count the fixed points of
f(x, .) on a dense state grid.  The count jumps from 3 to 1 where the fold
closes; the traced component nevertheless stays connected across the jump.

Usage: python3 scripts/fold_scan.py [--points N] [--grid N]
"""

import argparse
import sys

import numpy as np

from fptrace.problems import builtin, fixed_point_count_1d


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=41,
                        help="number of parameter values scanned")
    parser.add_argument("--grid", type=int, default=10_000,
                        help="state-grid density for the fixed-point count")
    args = parser.parse_args()

    problem = builtin("logit-coordination")
    print(f"{'x':>8} {'fixed points':>13}")
    prev = None
    for x in np.linspace(0.0, 1.0, args.points):
        count = fixed_point_count_1d(problem, float(x), grid=args.grid)
        marker = "  <- fold boundary" if prev is not None and count != prev else ""
        print(f"{x:>8.4f} {count:>13d}{marker}")
        prev = count
    return 0


if __name__ == "__main__":
    sys.exit(main())
