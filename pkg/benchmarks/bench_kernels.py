"""Timing comparison of the compiled kernels vs the pure numpy fallback.

Runs three representative workloads through the public API, then re-runs
them in a subprocess with CBOD_NUMBA=0 and prints both timings side by
side.  Invoke from the repository root:

    python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _workloads():
    from cbod import _kernels
    from cbod.dynamics import solve_ermakov, evolve_cbod
    from cbod.grid_oracle import Grid, GridState, build_hamiltonian, lowest_eigenpairs, propagate
    from cbod.params import OscillatorParams, RampSchedule

    ramp = RampSchedule(100.0, 60.0, 0.4)

    def ermakov():
        solve_ermakov(lambda t: np.sqrt(ramp.value(t)), 10.0, 0.4, steps=200_000)

    p = OscillatorParams(10.0, 1.0, RampSchedule(50.0, 25.0, 1.0), 100.0, 50.0)

    def riccati():
        evolve_cbod(p, 1.0, steps=50_000)

    g = Grid(2048, 1.2)
    x = g.axes()[0]
    h = build_hamiltonian(g, 1.0, 0.5 * 100.0 * x**2)
    _, v = lowest_eigenpairs(h, 1)
    psi0 = GridState(g, v[:, 0].astype(complex)).normalized()

    def crank_nicolson():
        propagate(lambda t: h, psi0, 0.4, 0.4 / 2000)

    return [
        ("ermakov_rk4 (200k steps)", ermakov),
        ("riccati_rk4 (50k steps)", riccati),
        ("tridiagonal CN (2048 pts x 2k steps)", crank_nicolson),
    ], _kernels.USING_NUMBA


def run_benchmarks(repeats=3):
    workloads, using_numba = _workloads()
    results = []
    for name, fn in workloads:
        fn()  # warm-up (and JIT compile on the numba path)
        best = min(_timed(fn) for _ in range(repeats))
        results.append((name, best))
    return results, using_numba


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    if os.environ.get("CBOD_BENCH_CHILD"):
        results, using_numba = run_benchmarks()
        json.dump({"numba": using_numba, "results": results}, sys.stdout)
        return 0

    results, using_numba = run_benchmarks()
    label = "numba" if using_numba else "numpy (numba unavailable)"
    child_env = dict(os.environ, CBOD_NUMBA="0", CBOD_BENCH_CHILD="1")
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__)],
        env=child_env,
        capture_output=True,
        text=True,
        check=True,
    )
    fallback = json.loads(out.stdout)
    assert not fallback["numba"], "fallback child unexpectedly compiled"

    width = max(len(name) for name, _ in results)
    print(f"{'workload':<{width}}  {label:>10}  {'fallback':>10}  {'speedup':>8}")
    for (name, fast), (_, slow) in zip(results, fallback["results"]):
        print(f"{name:<{width}}  {fast:>9.3f}s  {slow:>9.3f}s  {slow / fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
