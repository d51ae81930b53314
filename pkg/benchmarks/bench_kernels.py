#!/usr/bin/env python3
"""Times the compiled dynamic-programming kernels against the numpy fallback
and checks that both backends return identical results on every input.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from lexkit import _pykernels

try:
    from lexkit import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, args_list, repeats=3):
    """Fastest wall-clock pass over the whole workload, plus its outputs."""
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = [fn(*args) for args in args_list]
        best = min(best, time.perf_counter() - t0)
    return best, out


def workloads(rng):
    dtw = []
    for _ in range(200):
        ta = int(rng.integers(30, 50))
        tb = int(rng.integers(30, 50))
        dtw.append((rng.random((ta, tb)),))
    lev = []
    for _ in range(2000):
        a = rng.integers(0, 50, size=int(rng.integers(5, 60))).astype(np.int32)
        b = rng.integers(0, 50, size=int(rng.integers(5, 60))).astype(np.int32)
        lev.append((a, b))
    dpdp = []
    for _ in range(200):
        t_len = int(rng.integers(50, 150))
        dpdp.append((rng.random((t_len, 100)), float(rng.uniform(0.0, 2.0))))
    return (
        ("dtw_norm", "200 cost matrices, 30-50 frames a side", dtw),
        ("levenshtein", "2000 pairs, 5-60 symbols", lev),
        ("dpdp_backtrack", "200 lattices, 50-150 frames x 100 units", dpdp),
    )


def main():
    rng = np.random.default_rng(0)
    if _ckernels is None:
        print("compiled backend unavailable; timing the python backend only")
    header = (f"{'kernel':<15} {'workload':<40} "
              f"{'python':>9} {'compiled':>9} {'speedup':>8}")
    print(header)
    print("-" * len(header))
    for name, desc, args_list in workloads(rng):
        py_time, py_out = best_of(getattr(_pykernels, name), args_list)
        if _ckernels is None:
            print(f"{name:<15} {desc:<40} {py_time:>8.3f}s {'-':>9} {'-':>8}")
            continue
        c_time, c_out = best_of(getattr(_ckernels, name), args_list)
        for got, want in zip(c_out, py_out):
            if isinstance(want, np.ndarray):
                assert np.array_equal(got, want), f"{name}: backend mismatch"
            else:
                assert got == want, f"{name}: backend mismatch"
        print(f"{name:<15} {desc:<40} {py_time:>8.3f}s {c_time:>8.3f}s "
              f"{py_time / c_time:>7.1f}x")
    if _ckernels is not None:
        print("all outputs identical across backends")


if __name__ == "__main__":
    main()
