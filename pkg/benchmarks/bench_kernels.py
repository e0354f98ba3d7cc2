"""Benchmark the numba kernels against their pure-numpy twins.

Times the IRLS kernel on the two workloads that dominate real runs: the
small weighted least-squares fits of the case-study selection and the
Gamma dispersion fits of the Monte Carlo harness.  Run with

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from jmmd import _kernels as K
from jmmd import _kernels_nb as nb
from jmmd import _kernels_np as npk


def _case_study_problem(rng):
    # 32 x 8 two-level design with dispersion weights, Normal/identity
    n, p = 32, 8
    X = np.column_stack([np.ones(n)] + [rng.choice([-1.0, 1.0], n) for _ in range(p - 1)])
    y = 2.25 + X[:, 1] * 0.4 + rng.normal(scale=0.3, size=n)
    w = np.exp(rng.uniform(-1.5, 1.5, n))
    return np.ascontiguousarray(X), y, w, K.FAM_NORMAL, K.LINK_IDENTITY, 1.0


def _monte_carlo_problem(rng):
    # 150 x 4 Gamma/log dispersion fit on chi-square-like responses
    n, p = 150, 4
    X = np.column_stack([np.ones(n)] + [rng.uniform(-1, 1, n) for _ in range(p - 1)])
    y = rng.chisquare(1.0, n) * np.exp(0.5 * X[:, 1]) + 1e-9
    w = np.ones(n)
    return np.ascontiguousarray(X), y, w, K.FAM_GAMMA, K.LINK_LOG, 1.0


def _time(fn, problems, repeats):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        for X, y, w, fam, link, m in problems:
            fn(X, y, w, fam, link, m, 1e-10, 100)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--fits", type=int, default=400, help="fits per timed pass")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    workloads = {
        "case-study WLS (n=32, p=8)": [_case_study_problem(rng) for _ in range(args.fits)],
        "Monte Carlo Gamma (n=150, p=4)": [_monte_carlo_problem(rng) for _ in range(args.fits)],
    }

    # trigger compilation outside the timed region
    for problems in workloads.values():
        nb.irls(*problems[0][:3], problems[0][3], problems[0][4], problems[0][5], 1e-10, 100)

    print(f"{'workload':<32}{'numba':>12}{'numpy':>12}{'speedup':>9}")
    for name, problems in workloads.items():
        t_nb = _time(nb.irls, problems, args.repeats)
        t_np = _time(npk.irls, problems, args.repeats)
        print(
            f"{name:<32}{t_nb * 1e3:>10.1f}ms{t_np * 1e3:>10.1f}ms"
            f"{t_np / t_nb:>8.1f}x"
        )
    print(f"({args.fits} fits per pass, best of {args.repeats})")


if __name__ == "__main__":
    main()
