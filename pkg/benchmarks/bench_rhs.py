#!/usr/bin/env python3
"""Time one collision-rate evaluation: numba loops vs the numpy fallback.

    python3 benchmarks/bench_rhs.py --cells 30 60 120 --repeat 50
"""

import argparse
import time

import numpy as np

from wavekin import _kernels
from wavekin._jit import USE_NUMBA
from wavekin.collision import OperatorContext, brute_force_rhs
from wavekin.mesh import build_uniform_grid


def best_of(fn, repeat):
    fn()  # warm-up / compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(cells, repeat):
    ctx = OperatorContext(build_uniform_grid(1e-9, 10.0, cells))
    t0 = time.perf_counter()
    t = ctx.table
    build = time.perf_counter() - t0
    n = np.random.default_rng(0).random(cells)
    ext = np.append(n, 1.0)
    out = np.empty(cells)
    row = {"cells": cells, "entries": t.size, "build_s": build}
    row["numpy_s"] = best_of(
        lambda: _kernels.apply_table_numpy(ext, t.target, t.term, t.a, t.b, t.c, t.coef, out),
        repeat)
    if USE_NUMBA:
        row["numba_s"] = best_of(
            lambda: _kernels.apply_table_seq(ext, t.target, t.term, t.a, t.b, t.c, t.coef, out),
            repeat)
        row["numba_par_s"] = best_of(
            lambda: _kernels.apply_table_par(ext, t.offsets, t.term, t.a, t.b, t.c, t.coef, out),
            repeat)
        if cells <= 40:
            row["oracle_s"] = best_of(lambda: brute_force_rhs(n, ctx), max(1, repeat // 10))
    return row


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, nargs="+", default=[20, 40, 80])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    cols = ["cells", "entries", "build_s", "numpy_s", "numba_s", "numba_par_s", "oracle_s"]
    print(" ".join(f"{c:>12}" for c in cols))
    for cells in args.cells:
        row = bench(cells, args.repeat)
        print(" ".join(f"{row[c]:>12.4g}" if c in row else f"{'-':>12}" for c in cols))
    if not USE_NUMBA:
        print("numba disabled (WAVEKIN_DISABLE_NUMBA); only the numpy path was timed")


if __name__ == "__main__":
    main()
