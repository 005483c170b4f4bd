#!/usr/bin/env python3
"""Benchmark the jitted kernels against the pure-NumPy fallback.

Runs itself twice in subprocesses (COLDPLASMA_NUMBA=1 and =0), times the hot
paths in each, and prints a comparison table.  Direct worker use:

    COLDPLASMA_NUMBA=0 python benchmarks/bench_kernels.py --worker
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _time(fn, min_time=0.4):
    fn()  # warm up (includes JIT compilation on the numba path)
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt >= min_time:
            return dt / n
        n = max(n + 1, int(n * (1.5 * min_time / max(dt, 1e-9))))


def run_worker():
    import numpy as np

    from coldplasma import backend, kernels
    from coldplasma.conserved import period_event
    from coldplasma.integrator import IntegratorConfig, integrate

    cfg = IntegratorConfig()
    y_full = np.array([0.02, 0.01, -0.01, 0.02, 0.1, 0.01, -0.01, 0.1, 0.0])
    T = period_event(0.2, cfg)
    y_aug = np.concatenate([[0.0, 0.2], np.eye(4).ravel()])
    y_aug9 = np.concatenate(
        [[0.2, 0, 0, 0.2, 0.1, 0, 0, 0.1, 0], np.eye(9).ravel()])

    def bench_rhs():
        for _ in range(20_000):
            kernels.rhs_full(0.0, y_full)

    def bench_orbit():
        integrate(kernels.rhs_axisym, np.array([0.0, 0.3]), 0.0, 50.0, cfg)

    def bench_monodromy4():
        integrate(kernels.rhs_aug_electrostatic, y_aug, 0.0, T, cfg)

    def bench_monodromy9():
        integrate(kernels.rhs_aug_full9, y_aug9, 0.0, T, cfg)

    results = {
        "backend": backend.backend_name(),
        "rhs_full x20k [s]": _time(bench_rhs),
        "axisym orbit, 50 time units [s]": _time(bench_orbit),
        "electrostatic monodromy (18 comps) [s]": _time(bench_monodromy4),
        "full monodromy (90 comps) [s]": _time(bench_monodromy9),
    }
    print(json.dumps(results))


def run_comparison():
    rows = {}
    for flag in ("1", "0"):
        env = dict(os.environ, COLDPLASMA_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker"],
            env=env, capture_output=True, text=True, check=True)
        rows[flag] = json.loads(out.stdout.strip().splitlines()[-1])
    jit, plain = rows["1"], rows["0"]
    width = max(len(k) for k in jit) + 2
    print(f"{'benchmark':<{width}} {jit['backend']:>12} "
          f"{plain['backend']:>12} {'speedup':>9}")
    for key in jit:
        if key == "backend":
            continue
        a, b = jit[key], plain[key]
        print(f"{key:<{width}} {a:>12.3e} {b:>12.3e} {b / a:>8.1f}x")


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", action="store_true",
                        help="time the current backend and emit JSON")
    args = parser.parse_args()
    if args.worker:
        run_worker()
    else:
        run_comparison()
