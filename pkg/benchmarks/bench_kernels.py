"""Benchmark the compiled kernels against the numpy fallbacks.

Run: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from touchdecode import kernels


def timeit(fn, *args, repeat=5, number=200):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def bench_fuse(rng):
    obs_mean = rng.uniform(-50, 50, 2)
    obs_cov = np.diag(rng.uniform(1, 30, 2))
    key_means = np.ascontiguousarray(rng.uniform(-80, 80, size=(39, 2)))
    key_covs = np.ascontiguousarray(
        np.stack([np.diag(rng.uniform(4, 40, 2)) for _ in range(39)]))
    args = (np.ascontiguousarray(obs_mean), np.ascontiguousarray(obs_cov),
            key_means, key_covs)
    return ("fuse_log_rho_batch (39 keys)",
            timeit(kernels._py_fuse_log_rho_batch, *args),
            timeit(kernels._native.fuse_log_rho_batch, *args)
            if kernels._native else None)


def bench_ctc(rng):
    T, L = 120, 20
    probs = rng.uniform(0.01, 1.0, size=(T, 11))
    probs = np.ascontiguousarray(probs / probs.sum(axis=1, keepdims=True))
    labels = np.ascontiguousarray(rng.integers(0, 10, size=L))
    return ("ctc_forward_backward (T=120, L=20)",
            timeit(kernels._py_ctc_forward_backward, probs, labels, 10, number=5),
            timeit(kernels._native.ctc_forward_backward, probs, labels, 10, number=5)
            if kernels._native else None)


def bench_lev(rng):
    a = np.ascontiguousarray(rng.integers(0, 30, size=200))
    b = np.ascontiguousarray(rng.integers(0, 30, size=200))
    return ("levenshtein (len 200)",
            timeit(kernels._py_levenshtein, a, b, number=10),
            timeit(kernels._native.levenshtein, a, b, number=10)
            if kernels._native else None)


def main():
    rng = np.random.default_rng(0)
    print(f"active backend: {kernels.backend()}")
    print(f"{'kernel':42s} {'python':>12s} {'native':>12s} {'speedup':>9s}")
    for bench in (bench_fuse, bench_ctc, bench_lev):
        name, py, nat = bench(rng)
        if nat is None:
            print(f"{name:42s} {py * 1e6:10.1f}us {'n/a':>12s}")
        else:
            print(f"{name:42s} {py * 1e6:10.1f}us {nat * 1e6:10.1f}us "
                  f"{py / nat:8.1f}x")


if __name__ == "__main__":
    main()
