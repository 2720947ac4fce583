"""Compare the compiled and pure-Python knapsack kernels.

Usage: python3 benchmarks/bench_knapsack.py [--items N] [--max-value V] [--repeat R]
"""

import argparse
import random
import timeit

from claimtrade import knapsack
from claimtrade._knapsack_py import knapsack_max_value as py_kernel


def instance(rng, n, max_value):
    values = [rng.randint(1, max_value) for _ in range(n)]
    weights = [rng.randint(1, 10**6) for _ in range(n)]
    return values, weights, sum(weights) // 2


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--items", type=int, default=40)
    ap.add_argument("--max-value", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if knapsack.BACKEND != "compiled":
        print("compiled kernel not built; run `pip install -e . --no-build-isolation` first")
        return
    rng = random.Random(args.seed)
    vals, wts, cap = instance(rng, args.items, args.max_value)
    fast = lambda: knapsack.knapsack_max_value(vals, wts, cap, "compiled")
    slow = lambda: py_kernel(vals, wts, cap)
    assert fast() == slow()
    t_fast = min(timeit.repeat(fast, number=1, repeat=args.repeat))
    t_slow = min(timeit.repeat(slow, number=1, repeat=args.repeat))
    print(f"items={args.items} value sum={sum(vals)}")
    print(f"compiled: {t_fast * 1000:9.2f} ms")
    print(f"python:   {t_slow * 1000:9.2f} ms")
    print(f"speedup:  {t_slow / t_fast:9.1f}x")


if __name__ == "__main__":
    main()
