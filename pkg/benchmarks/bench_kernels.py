"""Numba vs pure-numpy kernels, one at a time and end to end.

    python benchmarks/bench_kernels.py [--repeats 20] [--no-e2e]

The end-to-end rows run ``multicheb --paper`` in a subprocess with and
without ``MULTICHEB_DISABLE_NUMBA`` so the flag takes effect at import.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from multicheb import kernels
from multicheb.basis import Domain, enumerate_monomials, generate_grid


def best_of(func, repeats):
    func()  # warm-up / JIT
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    pts = generate_grid(Domain.cube(-1.0, 1.0, 2), 0.01)
    exps = np.array(
        [m.exponents for m in enumerate_monomials(2, 4, "paper2d")], dtype=np.int64
    )
    cols = np.ascontiguousarray(rng.normal(size=(3 * 40401 + 22, 12)))
    cost = rng.normal(size=cols.shape[0])
    pi = rng.normal(size=12)
    normals = rng.normal(size=(4 * 441, 11))
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    offsets = rng.uniform(0.5, 1.0, size=normals.shape[0])
    x0 = rng.normal(size=11) * 5

    yield "price (121k x 12)", (
        lambda: kernels.price_numba(cols, cost, pi),
        lambda: kernels.price_numpy(cols, cost, pi),
    )
    r = cost - cols @ pi
    yield "first_below (121k)", (
        lambda: kernels.first_below_numba(r, -1e9),
        lambda: kernels.first_below_numpy(r, -1e9),
    )
    yield "cyclic sweep (1764 x 11)", (
        lambda: kernels.cyclic_sweep_numba(normals, offsets, x0.copy(), 1.9),
        lambda: kernels.cyclic_sweep_numpy(normals, offsets, x0.copy(), 1.9),
    )
    yield "simultaneous step (1764 x 11)", (
        lambda: kernels.simultaneous_step_numba(normals, offsets, x0, 1.0),
        lambda: kernels.simultaneous_step_numpy(normals, offsets, x0, 1.0),
    )
    yield "max violation (1764 x 11)", (
        lambda: kernels.max_violation_numba(normals, offsets, x0),
        lambda: kernels.max_violation_numpy(normals, offsets, x0),
    )
    yield "monomial design (40401 x 15)", (
        lambda: kernels.monomial_design_numba(pts, exps),
        lambda: kernels.monomial_design_numpy(pts, exps),
    )


def end_to_end(disable: bool) -> float:
    env = dict(os.environ)
    if disable:
        env["MULTICHEB_DISABLE_NUMBA"] = "1"
    else:
        env.pop("MULTICHEB_DISABLE_NUMBA", None)
    cmd = [sys.executable, "-m", "multicheb", "--paper"]
    subprocess.run(cmd, env=env, check=True, capture_output=True)  # warm caches
    t0 = time.perf_counter()
    subprocess.run(cmd, env=env, check=True, capture_output=True)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--no-e2e", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, (fast, ref) in cases(rng):
        tn = best_of(fast, args.repeats)
        tp = best_of(ref, max(1, args.repeats // 4))
        print(f"{name:32s} {tn * 1e3:11.3f} {tp * 1e3:11.3f} {tp / tn:8.1f}x")
    if not args.no_e2e:
        tn = end_to_end(False)
        tp = end_to_end(True)
        print(f"{'multicheb --paper (process)':32s} {tn * 1e3:11.0f} {tp * 1e3:11.0f} {tp / tn:8.1f}x")


if __name__ == "__main__":
    main()
