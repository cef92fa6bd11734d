"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both kernel sets are imported directly, so the FBHARMONIC_NUMBA flag does
not matter here. Results are checked for agreement before timing.
"""

import argparse
import time

import numpy as np

from fbharmonic import _kernels as K
from fbharmonic.numcore import stencil_tables


def best_of(fn, repeat):
    fn()  # warm-up (JIT compilation)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(rng):
    interior, left, right, _ = stencil_tables(2, 6)
    stencil_in = rng.standard_normal((4001, 3))
    grid_in = rng.standard_normal((801, 81 * 9))
    quad_in = rng.standard_normal((20001, 2))
    vals = np.sin(np.linspace(0, 3, 801))
    x = rng.uniform(0, 3, 50_000)
    return {
        "stencil d2, 4001x3": (lambda k: k(stencil_in, interior, left, right),
                                K.apply_stencil_numba, K.apply_stencil_numpy),
        "stencil d2, 801x729": (lambda k: k(grid_in, interior, left, right),
                                 K.apply_stencil_numba, K.apply_stencil_numpy),
        "cumulative quadrature, 20001x2": (lambda k: k(quad_in, 1e-3),
                                           K.cumulative_cubic_numba, K.cumulative_cubic_numpy),
        "lagrange interpolation, 50k points": (lambda k: k(vals, 0.0, 3 / 800, x, 8),
                                               K.lagrange_uniform_numba, K.lagrange_uniform_numpy),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<38s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, (call, fast, slow) in cases(rng).items():
        diff = float(np.max(np.abs(call(fast) - call(slow))))
        tf = best_of(lambda: call(fast), args.repeat)
        ts = best_of(lambda: call(slow), args.repeat)
        print(f"{name:<38s} {tf * 1e3:11.3f} {ts * 1e3:11.3f} {ts / tf:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
