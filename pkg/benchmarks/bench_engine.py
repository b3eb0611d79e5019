#!/usr/bin/env python3
"""Benchmark the two eating kernels (pure-Python vs compiled) on shared inputs.

Usage: python benchmarks/bench_engine.py [--repeats N]

Workloads: a random mixed-strategy corpus at the engine's fuzzing scale, a
dense all-proportional square, and the dyadic-block stress instance. Inputs
are prepared once; only kernel time is measured, and outputs are asserted
bit-identical across kernels before timing.
"""

from __future__ import annotations

import argparse
import time

from eatsim import _kernel
from eatsim.engine import _integer_weights
from eatsim.instances import GeneratorSpec, generate, random_instance

try:
    from eatsim import _speedups
except ImportError:
    _speedups = None

import random


def _mixed_corpus(count: int):
    rng = random.Random("bench-mixed")
    jobs = []
    for trial in range(count):
        n, m = rng.randint(4, 8), rng.randint(4, 8)
        inst = random_instance(n, m, 15, seed=trial).instance
        kinds, weights, orders = [], [], []
        for i in range(n):
            if rng.random() < 0.5:
                kinds.append(0)
                weights.append(_integer_weights(inst.valuations[i]))
                orders.append([])
            else:
                kinds.append(1)
                weights.append([])
                orders.append(rng.sample(range(m), rng.randint(1, m)))
        jobs.append((n, m, kinds, weights, orders, 1, []))
    return jobs


def _proportional_square(count: int, size: int):
    jobs = []
    for trial in range(count):
        inst = random_instance(size, size, 50, seed=10_000 + trial).instance
        weights = [_integer_weights(v) for v in inst.valuations]
        jobs.append((size, size, [0] * size, weights, [[]] * size, 1, []))
    return jobs


def _dyadic(count: int):
    gen = generate(GeneratorSpec("log-m-lb", {"k": 8, "q": 4}))
    inst = gen.instance
    weights = [_integer_weights(v) for v in inst.valuations]
    job = (inst.n, inst.m, [0] * inst.n, weights, [[]] * inst.n, 1, [])
    return [job] * count


def _time(kernel, jobs, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for job in jobs:
            kernel.run_eating(*job)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if _speedups is None:
        print("compiled kernel not built (pip install -e . --no-build-isolation); "
              "nothing to compare")
        return 1

    workloads = [
        ("mixed strategies, n,m in 4..8, 200 runs", _mixed_corpus(200)),
        ("all-proportional 8x8, 100 runs", _proportional_square(100, 8)),
        ("dyadic blocks n=12 m=31, 50 runs", _dyadic(50)),
    ]
    print(f"{'workload':45s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}")
    for label, jobs in workloads:
        sample = jobs[0]
        assert _kernel.run_eating(*sample) == _speedups.run_eating(*sample), \
            "kernels disagree; benchmark aborted"
        pure = _time(_kernel, jobs, args.repeats)
        fast = _time(_speedups, jobs, args.repeats)
        print(f"{label:45s} {pure:10.3f} {fast:13.3f} {pure / fast:7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
