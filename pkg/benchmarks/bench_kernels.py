"""Benchmark the compiled placement kernels against the pure-Python
fallback, both on the raw predicates and on an end-to-end compile.

Run:  python benchmarks/bench_kernels.py
The end-to-end comparison re-executes this script in a subprocess with
PACHINQO_PURE_PYTHON=1 so the fallback is selected at import time.
"""
from __future__ import annotations

import os
import random
import statistics
import subprocess
import sys
import time

import numpy as np


def bench_predicates(impl, n_obstacles: int = 200, calls: int = 20000) -> float:
    rng = random.Random(0)
    xs = np.array([rng.uniform(0, 300) for _ in range(n_obstacles)])
    ys = np.array([rng.uniform(0, 200) for _ in range(n_obstacles)])
    points = [(rng.uniform(0, 300), rng.uniform(0, 200)) for _ in range(calls)]
    t0 = time.perf_counter()
    hits = 0
    for px, py in points:
        if impl.clear_from(xs, ys, n_obstacles, px, py, 100.0):
            hits += 1
    dt = time.perf_counter() - t0
    return dt


def bench_compile(reps: int = 3) -> float:
    sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))
    from corpus import random_circuit

    from pachinqo.machine import PhysParams, build_layout, generate_grid
    from pachinqo.scheduler import Compiler

    params = PhysParams()
    circ = random_circuit(random.Random(18), 100, 1000, name="bench")
    layout = build_layout(100, "auto", params)
    grid = generate_grid("large-square", layout, params)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        Compiler(circ, "pachinqo", grid, layout, params).run()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> None:
    from pachinqo import kernels

    label = kernels.IMPLEMENTATION
    pred = bench_predicates(kernels)
    comp = bench_compile()
    print(f"{label:>8s} kernels: clearance predicate 20k calls x 200 "
          f"obstacles: {pred * 1e3:8.1f} ms", flush=True)
    print(f"{label:>8s} kernels: 100-qubit / 1000-gate compile (median of 3):"
          f" {comp * 1e3:8.1f} ms", flush=True)

    if label == "cython" and not os.environ.get("PACHINQO_PURE_PYTHON"):
        env = dict(os.environ, PACHINQO_PURE_PYTHON="1")
        subprocess.run([sys.executable, __file__], env=env, check=True)


if __name__ == "__main__":
    main()
