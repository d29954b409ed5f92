#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from gencount import _kernels_py

try:
    from gencount import _ckernels
except ImportError:
    _ckernels = None

REL_TOL = 1e-14
MAX_TERMS = 10_000


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - start) / repeat)
    return best


def workloads():
    rng = np.random.default_rng(0)
    xs_large = rng.exponential(2.0, 200_000) * 4.0
    logc = np.log(rng.random(60))
    ts = rng.exponential(1.0, 200_000) + 0.05

    yield ("ml3_series x=-3 (scalar)", 2000,
           lambda impl: impl.ml3_series(0.7, 1.0, 1.0, -3.0, REL_TOL, MAX_TERMS))
    yield ("bessel_i_log x=12 (scalar)", 2000,
           lambda impl: impl.bessel_i_log(3, 12.0, REL_TOL, MAX_TERMS))
    yield ("wright_m_series a=0.6 x=2 (scalar)", 2000,
           lambda impl: impl.wright_m_series(0.6, 2.0, REL_TOL, MAX_TERMS))
    yield ("bessel_i_log_vec 2e5 values", 5,
           lambda impl: impl.bessel_i_log_vec(2, xs_large, REL_TOL, MAX_TERMS))
    yield ("logpoly_eval_vec 2e5 x 60", 5,
           lambda impl: impl.logpoly_eval_vec(logc, ts))


def main() -> None:
    impls = [("python", _kernels_py)]
    if _ckernels is not None:
        impls.append(("compiled", _ckernels))
    else:
        print("compiled extension not built; timing the fallback only\n")

    header = f"{'kernel':<36}" + "".join(f"{name:>14}" for name, _ in impls)
    if len(impls) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, repeat, call in workloads():
        times = []
        for _, impl in impls:
            times.append(_time(lambda impl=impl: call(impl), repeat))
        row = f"{name:<36}" + "".join(f"{t * 1e6:>12.1f}us" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
