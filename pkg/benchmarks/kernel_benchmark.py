"""Benchmark the compiled grouping-search kernel against the pure-Python
reference on identical instances, checking that both return identical
results while timing them.

Usage: python benchmarks/kernel_benchmark.py [--repeat N]
"""

import argparse
import random
import time

from headbalance._kernel import implementations
from headbalance.allocate import _canonical_copies
from headbalance.profiles import SyntheticSpec, generate_profile
from headbalance.schemes import ReplicationScheme


def build_cases():
    cases = []

    rng = random.Random(2024)
    small = []
    while len(small) < 200:
        tp = rng.choice([2, 4])
        n = rng.randint(4, 8)
        if n % tp:
            continue
        weights = [rng.uniform(0, 10) for _ in range(n)]
        scheme = ReplicationScheme((1,) * n)
        wc, hc = _canonical_copies(scheme, weights)
        small.append((wc, hc, tp, float("inf"), 100_000, None))
    cases.append(("200 small layers (n<=8, exact)", small))

    rng = random.Random(99)
    medium = []
    for _ in range(20):
        n = 16
        tp = rng.choice([2, 4])
        weights = [rng.uniform(0, 10) for _ in range(n)]
        scheme = ReplicationScheme((1,) * n)
        wc, hc = _canonical_copies(scheme, weights)
        medium.append((wc, hc, tp, float("inf"), 200_000, None))
    cases.append(("20 medium layers (n=16, budget 200k)", medium))

    spec = SyntheticSpec("zipf", param=1.2, total_budget_per_layer=1000.0, seed=7)
    profile = generate_profile(spec, 1, 32)
    scheme = ReplicationScheme((1,) * 32)
    wc, hc = _canonical_copies(scheme, list(profile.weights[0]))
    big = [(wc, hc, tp, float("inf"), 200_000, None) for tp in (2, 4, 8)]
    cases.append(("32-head heavy-tail layer, tp in {2,4,8}", big))

    return cases


def run(impl, cases):
    started = time.perf_counter()
    results = [impl.solve_equal_split(*case) for case in cases]
    return time.perf_counter() - started, results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions (best is reported)")
    args = parser.parse_args()

    impls = implementations()
    if "compiled" not in impls:
        print("compiled kernel not built; run: python setup.py build_ext --inplace")
        return 1

    print(f"{'case':<42} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, cases in build_cases():
        py_best = cc_best = float("inf")
        py_results = cc_results = None
        for _ in range(args.repeat):
            t, py_results = run(impls["python"], cases)
            py_best = min(py_best, t)
            t, cc_results = run(impls["compiled"], cases)
            cc_best = min(cc_best, t)
        match = py_results == cc_results
        ratio = py_best / cc_best if cc_best > 0 else float("inf")
        print(f"{name:<42} {py_best:>9.3f}s {cc_best:>9.3f}s {ratio:>7.1f}x"
              + ("" if match else "   RESULT MISMATCH"))
        if not match:
            return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
