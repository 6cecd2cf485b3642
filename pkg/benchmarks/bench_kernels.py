#!/usr/bin/env python3
"""Benchmark the compiled batch log-determinant kernel against the pure fallback.

Usage:
    python benchmarks/bench_kernels.py [--points 4000] [--rho 1.0] [--eps 0.01]

The workload mirrors the hot path of the deviation-measure sweeps: many
window determinants at fixed parameters, in the dense regime (N = 64) and
the banded regime (N = 256).
"""

import argparse
import time

import numpy as np

from marylab import _kernels_py
from marylab.arithmetic import golden_frequency
from marylab.model import ModelParams, build_symbol

try:
    from marylab import _ext
except ImportError:
    _ext = None


def run(impl, xs, n_sites, omega, taps, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = impl.batch_logabsdet(xs, n_sites, omega, taps)
        best = min(best, time.perf_counter() - t0)
    return best, np.asarray(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=4000)
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--eps", type=float, default=0.01)
    args = ap.parse_args()

    freq = golden_frequency()
    symbol = build_symbol(args.rho, "exp_decay", decay=args.rho, margin=0.99)
    params = ModelParams(freq=freq, symbol=symbol, eps=args.eps, E=0.0)
    taps = params.window_taps()
    rng = np.random.default_rng(0)
    xs = rng.random(args.points)

    print(f"{args.points} points, rho={args.rho}, eps={args.eps}, "
          f"bandwidth={symbol.truncation_radius}")
    print(f"{'n_sites':>8} {'backend':>9} {'total s':>9} {'us/det':>9} {'speedup':>8}")
    for n_sites in (64, 256):
        t_py, ref = run(_kernels_py, xs, n_sites, freq.omega, taps)
        rows = [("python", t_py)]
        if _ext is not None:
            t_c, out = run(_ext, xs, n_sites, freq.omega, taps)
            err = float(np.max(np.abs(out - ref)))
            rows.append(("compiled", t_c))
        for name, t in rows:
            speed = f"{t_py / t:7.2f}x" if name == "compiled" else "       -"
            print(f"{n_sites:>8} {name:>9} {t:9.3f} {1e6 * t / args.points:9.2f} {speed}")
        if _ext is not None:
            print(f"{'':>8} max |compiled - python| = {err:.3e}")
    if _ext is None:
        print("compiled extension not available; showing the fallback only")


if __name__ == "__main__":
    main()
