"""Timing comparison of the two kernel backends.

Runs the projected-descent minimizer on the same packed problems with
the jitted backend and the pure-numpy one, and prints a small table.
The first jitted call includes compilation, so each backend gets one
untimed warmup before measurement.

Usage: python3 benchmarks/bench_backends.py [--repeats N] [--max-iter N]
"""

import argparse
import time

import numpy as np

from anisopolya import kernels


def run_once(impl, pack, start, max_iter):
    phi, r, it, conv = impl.descent(start.copy(), *pack,
                                    max_iter, 50, 1e-10, 0.1)
    return r, it, conv


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--max-iter", type=int, default=2000)
    args = ap.parse_args()

    backends = [(name, kernels.load_backend(name))
                for name in ("numba", "numpy")]
    weight_bps = np.array([0.0, 0.35, 0.6, 1.0])
    weight_vals = np.array([1.2, -0.4, 0.8])

    print(f"{'grid':>6} {'backend':>8} {'iters':>6} {'ms/run':>10} "
          f"{'speedup':>8}   quotient")
    for n in (64, 256, 1024):
        pack = kernels.make_problem(n, 1.7, 0.9, 2.5, 10.0,
                                    weight_bps, weight_vals)
        start = kernels.starts_for(n, 1)[5]
        times = {}
        results = {}
        for name, impl in backends:
            run_once(impl, pack, start, args.max_iter)  # warmup / JIT
            t0 = time.perf_counter()
            for _ in range(args.repeats):
                r, it, conv = run_once(impl, pack, start, args.max_iter)
            times[name] = (time.perf_counter() - t0) / args.repeats
            results[name] = (r, it, conv)
        for name, _ in backends:
            r, it, conv = results[name]
            rel = times["numpy"] / times[name]
            tag = "" if conv else " (iteration cap)"
            print(f"{n:>6} {name:>8} {it:>6} {times[name] * 1e3:>10.2f} "
                  f"{rel:>7.1f}x   {r:.12g}{tag}")
        if results["numba"][2] and results["numpy"][2]:
            drift = abs(results["numba"][0] - results["numpy"][0])
            print(f"{'':>6} backend quotient drift {drift:.2e}")


if __name__ == "__main__":
    main()
