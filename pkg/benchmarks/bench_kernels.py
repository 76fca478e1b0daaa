"""Compiled vs pure-Python kernel timings.

Usage: ``python benchmarks/bench_kernels.py [--n N] [--repeat R]``.
Each row reports the best of ``repeat`` wall-clock runs and the speedup.
"""
import argparse
import time

import numpy as np

from gaussmix import kernels
from gaussmix.core import SingleModeState, output_cm


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(n, seed=0):
    rng = np.random.default_rng(seed)
    ns, nt, n2 = (10 ** rng.uniform(-3, 2, n) for _ in range(3))
    tau = rng.uniform(0.01, 0.99, n)
    n_or = max(n // 100, 10)
    cms = np.array([output_cm(SingleModeState(*p[:2]), p[2], p[3]).matrix
                    for p in zip(ns[:n_or], nt[:n_or], n2[:n_or], tau[:n_or])])
    n_nc = max(n // 100, 10)
    return {
        f"measures_params (n={n})": lambda b: b.measures_params(ns, nt, n2, tau),
        f"emin_oracle_batch (n={n_or})": lambda b: b.emin_oracle_batch(cms, 2),
        f"effective_nc_batch (n={n_nc})": lambda b: b.effective_nc_batch(ns[:n_nc], nt[:n_nc]),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10000, help="number of parameter points")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    cy = kernels.compiled_backend()
    py = kernels.python_backend
    if cy is None:
        print("compiled extension not built; only the Python backend is timed")
    print(f"{'kernel':<32} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for name, fn in workloads(args.n).items():
        t_py = _best(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:<32} {t_py:>11.4f} {'-':>11} {'-':>8}")
            continue
        t_cy = _best(lambda: fn(cy), args.repeat)
        print(f"{name:<32} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
