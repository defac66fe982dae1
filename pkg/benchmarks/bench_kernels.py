"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat R] [--threads T]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from skewmix import kernels
from skewmix.mapspec import example
from skewmix.transfer import collocation


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    if kernels._native is None:
        print("compiled extension unavailable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    sp = example("perturbed_tripling")
    print(f"{'kernel':<28}{'size':>12}{'native [ms]':>14}{'python [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for N, cols in ((2**12, 1), (2**14, 1), (2**13, 64)):
        idx, w = collocation(sp, N).table(2.0 * np.pi, "cubic")
        h = rng.normal(size=(N, cols)) + 1j * rng.normal(size=(N, cols))
        out = {}

        def run(b):
            out[b] = kernels.gather_apply(idx, w, h, threads=args.threads, backend=b)

        tn = best_of(lambda: run("native"), args.repeat)
        tp = best_of(lambda: run("python"), args.repeat)
        diff = float(np.max(np.abs(out["native"] - out["python"])))
        print(f"{'gather_apply cubic':<28}{f'{N}x{cols}':>12}{1e3 * tn:>14.2f}{1e3 * tp:>14.2f}{tp / tn:>10.1f}{diff:>12.1e}")
    for m in (10**3, 10**5, 10**6):
        c = rng.normal(size=m)
        half = rng.uniform(0.01, 0.5, size=m)
        wt = rng.uniform(size=m)
        out = {}

        def run(b):
            out[b] = kernels.overlap_mass(c - half, c + half, wt, backend=b)

        tn = best_of(lambda: run("native"), args.repeat)
        tp = best_of(lambda: run("python"), args.repeat)
        diff = float(np.max(np.abs(out["native"] - out["python"])))
        print(f"{'overlap_mass':<28}{m:>12}{1e3 * tn:>14.2f}{1e3 * tp:>14.2f}{tp / tn:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
