"""Timing comparison of the compiled and pure-Python recursion backends.

Runs each sequential kernel on identical inputs through mixtail._speedups
and mixtail._fallback and reports best-of-N wall times plus the speedup.
The two backends produce byte-identical output, so only time differs.

    python3 benchmarks/bench_backends.py --n 2000000 --repeat 5
"""

import argparse
import time

import numpy as np

from mixtail import _fallback

try:
    from mixtail import _speedups
except ImportError:
    _speedups = None


def best_time(func, args, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=2_000_000,
                        help="innovation count per case (default 2e6)")
    parser.add_argument("--repeat", type=int, default=5,
                        help="repetitions; the best time wins (default 5)")
    args = parser.parse_args()

    if _speedups is None:
        parser.exit(1, "compiled extension not built; nothing to compare\n")

    rng = np.random.default_rng(0)
    eps = rng.standard_normal(args.n)
    cases = [
        ("ar1 theta=0.3", "ar1_recurse", (eps, 0.3, 0.0)),
        ("garch(1,1)", "garch_recurse",
         (eps, 0.05, np.array([0.15]), np.array([0.3]), 0.090909)),
        ("garch(1,2)", "garch_recurse",
         (eps, 0.05, np.array([0.15]), np.array([0.2, 0.1]), 0.0909)),
        ("garch(2,2) general", "garch_recurse",
         (eps, 0.05, np.array([0.1, 0.05]), np.array([0.2, 0.1]), 0.0909)),
    ]

    name_w = max(len(name) for name, _, _ in cases)
    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'case':<{name_w}}  {'compiled':>10}  {'python':>10}  speedup")
    for name, func_name, call_args in cases:
        fast = best_time(getattr(_speedups, func_name), call_args,
                         args.repeat)
        slow = best_time(getattr(_fallback, func_name), call_args,
                         args.repeat)
        out_fast = getattr(_speedups, func_name)(*call_args)
        out_slow = getattr(_fallback, func_name)(*call_args)
        agree = "" if np.array_equal(out_fast, out_slow) else "  MISMATCH"
        print(f"{name:<{name_w}}  {fast * 1e3:>8.1f}ms  {slow * 1e3:>8.1f}ms"
              f"  {slow / fast:>6.1f}x{agree}")


if __name__ == "__main__":
    main()
