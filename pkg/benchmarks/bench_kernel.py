"""Benchmark the compiled radial-return kernel against the pure-numpy
fallback, on the raw batch update and on a small full solve.

Run:  python3 benchmarks/bench_kernel.py [--points N]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np


def bench_batch(radial_return_batch, n_points: int, repeats: int = 5) -> float:
    rng = np.random.default_rng(0)
    strain = rng.normal(scale=0.01, size=(n_points, 6))
    eps_p = np.zeros((n_points, 6))
    alpha = np.zeros(n_points)
    emod = np.full(n_points, 8000.0)
    sy = np.full(n_points, 60.0)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        radial_return_batch(strain, eps_p, alpha, emod, 0.3, sy,
                            1.0, 0.01, -0.05, 0.05)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_solve(repeats: int = 1) -> float:
    from femrisk.femodel import (MaterialModel, SolveControl, solve,
                                 stance_bc, uniform_grid)
    grid = uniform_grid((4, 4, 10), 0.25)
    material = MaterialModel()
    control = SolveControl(increment=0.05, max_increments=12, stop_fraction=0.95)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        solve(grid, material, stance_bc(grid.dims), control)
        best = min(best, time.perf_counter() - t0)
    return best


def run(variant: str, n_points: int):
    os.environ["FEMRISK_PURE_KERNEL"] = "1" if variant == "pure" else "0"
    # The kernel module picks its implementation at import, so force a clean
    # import tree for each variant.
    import importlib
    import sys
    for name in [m for m in sys.modules if m.startswith("femrisk")]:
        del sys.modules[name]
    kernel = importlib.import_module("femrisk.femodel._kernel")
    impl = kernel.KERNEL_IMPL
    t_batch = bench_batch(kernel.radial_return_batch, n_points)
    t_solve = bench_solve()
    return impl, t_batch, t_solve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200_000,
                    help="Gauss points in the batch benchmark")
    args = ap.parse_args()

    results = {}
    for variant in ("pure", "compiled"):
        impl, t_batch, t_solve = run(variant, args.points)
        results[variant] = (impl, t_batch, t_solve)
        print(f"{variant:>9} (impl={impl}):  batch {t_batch * 1e3:8.2f} ms"
              f"   solve {t_solve * 1e3:8.2f} ms")

    if results["compiled"][0] == results["pure"][0]:
        print("compiled kernel unavailable; both runs used the pure fallback")
    else:
        sb = results["pure"][1] / results["compiled"][1]
        ss = results["pure"][2] / results["compiled"][2]
        print(f"speedup: batch {sb:.2f}x, solve {ss:.2f}x")


if __name__ == "__main__":
    main()
