#!/usr/bin/env python3
"""Time the plan-metric kernel backends on identical batches.

Runs the pure-Python and compiled implementations over the same randomly
drawn candidate plans, checks they agree bit for bit, and prints the best
wall time per batch size.
"""

import argparse
import sys
import time

import numpy as np

from spurline import kernels
from spurline.components import MixerSpec
from spurline.planner import rejection_tables

GHZ = 1_000_000_000


def make_batch(rng, size):
    f_if = rng.integers(1 * GHZ, 8 * GHZ, size=size, dtype=np.int64)
    f_lo_tx = rng.integers(15 * GHZ, 30 * GHZ, size=size, dtype=np.int64)
    f_lo_rx = f_lo_tx + rng.integers(-2 * GHZ, 2 * GHZ, size=size, dtype=np.int64)
    return f_if, f_lo_tx, np.abs(f_lo_rx) + 1


def best_time(impl, batch, kw, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        kernels.plan_metrics(*batch, impl=impl, **kw)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="100,1000,10000",
                    help="comma-separated batch sizes")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--n-max", type=int, default=3)
    ap.add_argument("--m-max", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    tx, rx = rejection_tables(MixerSpec(), MixerSpec(), args.n_max, args.m_max)
    kw = dict(
        usb=True, n_max=args.n_max, m_max=args.m_max,
        tx_rej=tx, rx_rej=rx,
        band_lo=3_500_000_000, band_hi=6 * GHZ,
        fs=4 * GHZ, guard=10_000_000,
    )

    pure = kernels.get_impl("pure")
    try:
        compiled = kernels.get_impl("compiled")
    except ImportError:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    sizes = [int(s) for s in args.sizes.split(",") if s]

    check = make_batch(rng, 200)
    a = kernels.plan_metrics(*check, impl=pure, **kw)
    b = kernels.plan_metrics(*check, impl=compiled, **kw)
    for x, y in zip(a, b):
        if not np.array_equal(x, y, equal_nan=True):
            print("backends disagree; refusing to time them", file=sys.stderr)
            return 1

    print(f"{'size':>8}  {'pure [s]':>12}  {'compiled [s]':>12}  {'speedup':>8}")
    for size in sizes:
        batch = make_batch(rng, size)
        tp = best_time(pure, batch, kw, args.repeats)
        tc = best_time(compiled, batch, kw, args.repeats)
        print(f"{size:>8}  {tp:>12.6f}  {tc:>12.6f}  {tp / tc:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
