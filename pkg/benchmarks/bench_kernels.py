#!/usr/bin/env python3
"""Benchmark the compiled kernels against the Python reference.

Times the three hot paths behind every cone computation: profile
integration with dense output, the Robin-mismatch shooting sweep, and the
smallest-eigenvalue tridiagonal solve.  Run after `python setup.py
build_ext --inplace` (or an editable install) to have the native module.
"""

import time

import numpy as np

from conestab._kernels import _pyref

try:
    from conestab._kernels import _native
except ImportError:
    _native = None

from conestab.cones import _series_start


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dense(mod):
    t0, f0, g0 = _series_start(2, 5, -6.0)
    ts = np.linspace(1e-3, 1.29, 4096)
    return lambda: mod.angular_dense(2, 5, -6.0, t0, f0, g0, ts, 2)


def bench_shooting_sweep(mod):
    t0, f0, g0 = _series_start(3, 4, 5.58)

    def run():
        for mu in np.linspace(5.0, 6.0, 20):
            mod.angular_integrate(3, 4, mu, t0, f0, g0, 1.107, 1024)

    return run


def bench_eig(mod):
    rng = np.random.default_rng(0)
    N = 4097
    d = np.abs(rng.normal(size=N)) + 2.0
    e = -np.abs(rng.normal(size=N - 1))
    return lambda: mod.tridiag_smallest_eig(d, e)


def main():
    rows = []
    for name, make in (
        ("profile dense output (4096 nodes)", bench_dense),
        ("shooting sweep (20 x 1024 steps)", bench_shooting_sweep),
        ("tridiag smallest eig (N=4097)", bench_eig),
    ):
        t_py = timeit(make(_pyref))
        if _native is not None:
            t_nat = timeit(make(_native))
            rows.append((name, t_py, t_nat, t_py / t_nat))
        else:
            rows.append((name, t_py, None, None))

    print(f"{'kernel':<38} {'python':>10} {'native':>10} {'speedup':>8}")
    for name, t_py, t_nat, ratio in rows:
        if t_nat is None:
            print(f"{name:<38} {t_py * 1e3:9.2f}ms {'-':>10} {'-':>8}")
        else:
            print(f"{name:<38} {t_py * 1e3:9.2f}ms {t_nat * 1e3:9.2f}ms {ratio:7.1f}x")
    if _native is None:
        print("native module not built; showing reference timings only")


if __name__ == "__main__":
    main()
