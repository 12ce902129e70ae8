#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the numpy fallback.

Times the thin-update kernels at sampler-typical sizes, then a full
reversible-jump chain under each backend.  Run from the repo root:

    python3 benchmarks/bench_kernels.py [--reps 20000] [--chain-draws 20000]

Forcing the fallback for the chain comparison re-executes this script in a
subprocess with QRKIT_FORCE_PY=1 (the backend is chosen at import time).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def time_call(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def bench_kernels(reps):
    from qrkit.backend import get_kernels
    from qrkit.linalg import thin_r

    ck = get_kernels()
    pk = get_kernels(force_python=True)
    if not getattr(ck, "IS_COMPILED", False):
        print("compiled backend unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    rows = []
    for p in (8, 16, 32, 64):
        X = rng.standard_normal((p + 40, p))
        R = np.ascontiguousarray(thin_r(X))
        b = rng.standard_normal(p)
        u = rng.standard_normal(p)
        cross = np.ascontiguousarray(X.T @ X[:, :1])
        vv = np.ascontiguousarray(X[:, :1].T @ X[:, :1] + 1.0)
        cases = {
            "solve_rt": lambda k: (lambda: k.solve_rt(R, b)),
            "add_row": lambda k: (lambda: k.thin_add_row(R.copy(), u.copy())),
            "del_col": lambda k: (lambda: k.thin_del_cols(R.copy(), p // 2, 1)),
            "add_col": lambda k: (lambda: k.thin_add_cols(R, cross, vv)),
        }
        for name, make in cases.items():
            tc = time_call(make(ck), reps)
            tp = time_call(make(pk), max(reps // 10, 100))
            rows.append((name, p, tc * 1e6, tp * 1e6, tp / tc))
    print(f"{'kernel':10s} {'p':>4s} {'compiled us':>12s} {'python us':>10s} {'speedup':>8s}")
    for name, p, tc, tp, sp in rows:
        print(f"{name:10s} {p:4d} {tc:12.2f} {tp:10.2f} {sp:8.1f}x")


def bench_chain(draws):
    from qrkit.backend import BACKEND
    from qrkit.bayes import default_hyperparams, generate_design, generate_response, run_chain

    n, p = 300, 200
    X = generate_design(n, p, seed=1)
    y, _ = generate_response(X, 10, 1.0, seed=2)
    hp = default_hyperparams(n, p, float(np.var(y)))
    t0 = time.perf_counter()
    run_chain(X, y, hp, draws=draws, seed=3)
    dt = time.perf_counter() - t0
    print(f"chain [{BACKEND}]: {draws} draws in {dt:.2f}s ({dt / draws * 1e6:.1f} us/draw)")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=20000)
    ap.add_argument("--chain-draws", type=int, default=20000)
    ap.add_argument("--chain-only", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.chain_only:
        bench_chain(args.chain_draws)
        return

    bench_kernels(args.reps)
    bench_chain(args.chain_draws)
    sys.stdout.flush()
    env = dict(os.environ, QRKIT_FORCE_PY="1")
    subprocess.run(
        [sys.executable, __file__, "--chain-only", "--chain-draws", str(args.chain_draws)],
        env=env,
        check=True,
    )


if __name__ == "__main__":
    main()
