#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Run after building the extension in place:

    python3 setup.py build_ext --inplace
    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from sobrough._kernels import _fallback

try:
    from sobrough._kernels import _speedups
except ImportError:
    _speedups = None

from sobrough import algebra as A


def group_batch(n, d, N, seed=0):
    rng = np.random.default_rng(seed)
    alg = A.TensorAlgebra(d, N)
    pts = np.vstack([np.zeros(d), np.cumsum(0.3 * rng.standard_normal((n - 1, d)), axis=0)])
    return np.ascontiguousarray(A.signature_path_packed(pts, alg))


def timeit(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases():
    d, N = 2, 2
    nodes = group_batch(1025, d, N)
    inv_py = _fallback.inverse_batch(nodes, d, N)
    w = np.random.default_rng(1).random((257, 257))
    wbig = np.random.default_rng(2).random((513, 513))

    yield ("chen_prefix (256 products, d=2, N=2)",
           lambda m: m.chen_prefix(np.ascontiguousarray(nodes[:256]), d, N))
    yield ("inverse_batch (1025 nodes)",
           lambda m: m.inverse_batch(nodes, d, N))
    yield ("hom_dist_matrix (513x513)",
           lambda m: m.hom_dist_matrix(nodes[:513], inv_py[:513], d, N, 0, 513))
    yield ("sobolev_pair_sum (1025 nodes)",
           lambda m: m.sobolev_pair_sum(nodes, inv_py, d, N, 4.0, 2.6, 1 / 1024, 0, 1025))
    yield ("partition_dp_max (513 points)",
           lambda m: m.partition_dp_max(wbig))
    yield ("interval_dp_table (257 points)",
           lambda m: m.interval_dp_table(w))


def main():
    if _speedups is None:
        print("compiled kernels unavailable; showing fallback timings only")
    print(f"{'kernel':44s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, call in cases():
        t_py = timeit(lambda: call(_fallback))
        if _speedups is not None:
            t_cy = timeit(lambda: call(_speedups))
            print(f"{name:44s} {t_py * 1e3:9.1f}ms {t_cy * 1e3:9.1f}ms {t_py / t_cy:7.1f}x")
        else:
            print(f"{name:44s} {t_py * 1e3:9.1f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
