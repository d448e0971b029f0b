#!/usr/bin/env python3
"""Run the seeded random agreement suite and print blow-up statistics.

Usage: python scripts/run_corpus.py [--seed N] [--count N] [--sigs N]
"""

import argparse
import sys
import time

from adtsolve.corpus import run_agreement


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2026)
    ap.add_argument("--count", type=int, default=500)
    ap.add_argument("--sigs", type=int, default=5)
    args = ap.parse_args()
    started = time.perf_counter()
    stats = run_agreement(args.seed, count=args.count, n_sigs=args.sigs)
    print(stats.summary(include_timing=True))
    print(f"total: {time.perf_counter() - started:.1f} s")
    return 0 if not stats.failures else 1


if __name__ == "__main__":
    sys.exit(main())
