"""Compare the compiled and pure-Python kernel backends.

Times the subsampled Hessian-vector product and the stochastic inner
iteration on synthetic data of a few sizes and prints a speedup table.

Usage: python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from subnewton import kernels, synthesize
from subnewton.kernels import pure


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if kernels.BACKEND != "cython":
        print("compiled backend not available; timing pure Python only")

    print(f"active backend: {kernels.BACKEND}")
    print(f"{'case':<34}{'compiled':>12}{'pure':>12}{'speedup':>10}")
    rng = np.random.default_rng(0)
    for n, d in ((2000, 20), (10000, 50), (20000, 100)):
        ds = synthesize(n, d, seed=1)
        X = ds.features
        w = rng.standard_normal(d)
        p = rng.standard_normal(d)
        g = rng.standard_normal(d)
        idx = np.arange(n, dtype=np.int64)

        cases = {
            f"hvp n={n} d={d}": lambda k: k.hvp_indexed(X, w, p, idx, 0.01),
        }
        it = min(5000, n)
        sgi_idx = rng.integers(0, n, it).astype(np.int64)

        def sgi(k):
            buf = np.zeros(d)
            k.sgi_iterate(X, w, g, 0.01, 0.25, sgi_idx, buf, 1e12)

        cases[f"sgi it={it} n={n} d={d}"] = sgi

        for name, fn in cases.items():
            t_pure = best_of(lambda: fn(pure), args.repeats)
            if kernels.BACKEND == "cython":
                t_fast = best_of(lambda: fn(kernels), args.repeats)
                print(f"{name:<34}{t_fast * 1e3:>10.2f}ms"
                      f"{t_pure * 1e3:>10.2f}ms{t_pure / t_fast:>9.1f}x")
            else:
                print(f"{name:<34}{'-':>12}{t_pure * 1e3:>10.2f}ms{'-':>10}")


if __name__ == "__main__":
    main()
