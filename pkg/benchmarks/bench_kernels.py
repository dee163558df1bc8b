#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy fallback.

Times the cyclic Jacobi eigensolver and the simulation recurrence on the
sizes this package actually uses, plus one end-to-end codesign solve.  Run
after an editable install:

    python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from privform.kernels import _impl_py

try:
    from privform.kernels import _impl_cy
except ImportError:
    _impl_cy = None


def time_call(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_jacobi(impl, a: np.ndarray, repeats: int) -> float:
    tol = 1e-12 * max(1.0, float(np.linalg.norm(a)))

    def run():
        work = a.copy()
        vecs = np.eye(a.shape[0])
        impl.jacobi_rotate(work, vecs, tol, 100)

    return time_call(run, repeats)


def bench_chain(impl, n: int, d: int, steps: int, repeats: int) -> float:
    rng = np.random.default_rng(0)
    a = np.zeros((n, n))
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = rng.uniform(0.5, 2.0)
    lap = np.diag(a.sum(axis=1)) - a
    gamma = 0.9 / float(a.sum(axis=1).max())
    mstep = np.eye(n) - gamma * lap
    ga = gamma * a
    vblk = rng.standard_normal((steps, n, d))
    nblk = rng.standard_normal((steps, n, d))
    xout = np.empty((steps, n, d))

    def run():
        x = np.zeros((n, d))
        impl.simulate_chain(mstep, ga, x, vblk, nblk, xout)

    return time_call(run, repeats)


def main() -> None:
    impls = [("python", _impl_py)]
    if _impl_cy is not None:
        impls.append(("cython", _impl_cy))

    rng = np.random.default_rng(7)
    print("cyclic Jacobi eigensolver (full decomposition, best of 5)")
    print(f"{'n':>6} " + "".join(f"{name:>14}" for name, _ in impls))
    for n in (5, 10, 20, 40, 80):
        b = rng.standard_normal((n, n))
        a = np.ascontiguousarray((b + b.T) / 2)
        row = [bench_jacobi(impl, a, 5) for _, impl in impls]
        print(f"{n:>6} " + "".join(f"{t * 1e6:>12.1f}us" for t in row))

    print()
    print("simulation recurrence (10 agents, best of 3)")
    print(f"{'steps x d':>12} " + "".join(f"{name:>14}" for name, _ in impls))
    for steps, d in ((10_000, 1), (10_000, 2), (100_000, 2)):
        row = [bench_chain(impl, 10, d, steps, 3) for _, impl in impls]
        print(f"{steps:>9}x{d} " + "".join(f"{t * 1e3:>12.1f}ms" for t in row))

    print()
    print("end-to-end codesign solve on the bundled ten-node mask")
    import os
    from pathlib import Path

    from privform import codesign, io

    cfg = io.load_toml(Path(__file__).resolve().parents[1] / "configs" / "ten_node_codesign.toml")
    problem, options, _ = io.problem_from_config(
        cfg, Path(__file__).resolve().parents[1] / "configs"
    )
    t0 = time.perf_counter()
    solution = codesign.solve(problem, options, seed=0)
    dt = time.perf_counter() - t0
    from privform.kernels import BACKEND

    print(
        f"backend={BACKEND} (PRIVFORM_PURE_PYTHON={os.environ.get('PRIVFORM_PURE_PYTHON', '0')}): "
        f"{dt:.2f}s, status={solution.status}, objective={solution.objective_value:.6f}"
    )


if __name__ == "__main__":
    main()
