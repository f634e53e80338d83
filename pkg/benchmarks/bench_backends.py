#!/usr/bin/env python3
"""Compare the compiled summation core against the numpy fallback.

Times the dominant kernels of the workload: the causal operator applied on
a full window (pairwise sums) and one stopping-time decomposition step.
Run after building the extension:  python3 benchmarks/bench_backends.py
"""

import time

import numpy as np

from causalcz import core
from causalcz.dyadic import BoundaryCube
from causalcz.grid import GridFunction, Window
from causalcz.kernels import beurling
from causalcz.operators import PvParams, apply_causal
from causalcz.sparse import SparseParams, build


def timeit(fn, repeat=3):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"compiled extension available: {core.COMPILED_AVAILABLE}")
    rng = np.random.default_rng(0)
    k = beurling(sign="-")

    rows = []
    for depth in (5, 6, 7):
        w = Window(BoundaryCube(0, (0,)), depth)
        f = GridFunction(w, rng.uniform(0.0, 1.0, w.shape))
        t_fast = timeit(lambda: apply_causal(k, f, PvParams()))
        t_slow = timeit(
            lambda: apply_causal(k, f, PvParams(), force_fallback=True),
            repeat=1,
        )
        rows.append(("apply_causal", depth, w.cells_per_axis ** 2,
                     t_fast, t_slow))

    # dense data exercises the subtree maximal sums inside the build
    w6 = Window(BoundaryCube(0, (0,)), 6)
    f6 = GridFunction.from_callable(
        lambda t, x: np.exp(-8 * ((t - 0.6) ** 2 + (x - 0.5) ** 2)), w6
    )

    import causalcz.core as c

    def build_with(force):
        old = c.USING_COMPILED
        c.USING_COMPILED = c.COMPILED_AVAILABLE and not force
        try:
            build(k, f6, SparseParams())
        finally:
            c.USING_COMPILED = old

    t_fast = timeit(lambda: build_with(False), repeat=1)
    t_slow = timeit(lambda: build_with(True), repeat=1)
    rows.append(("sparse build", 6, 64 ** 2, t_fast, t_slow))

    print(f"{'workload':<14}{'J':>3}{'cells':>8}{'compiled':>12}"
          f"{'fallback':>12}{'speedup':>9}")
    for name, depth, cells, fast, slow in rows:
        print(f"{name:<14}{depth:>3}{cells:>8}{fast:>11.3f}s{slow:>11.3f}s"
              f"{slow / fast:>8.1f}x")


if __name__ == "__main__":
    main()
