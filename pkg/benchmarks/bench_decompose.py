"""Time decompose() on complete graphs with the numba kernel and the
pure-Python fallback.

    python benchmarks/bench_decompose.py [--sizes 200 500 1000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from topofc import _accel
from topofc.pgh import WeightedGraph, decompose


def complete_graph(n, rng):
    i, j = np.triu_indices(n, k=1)
    return WeightedGraph(n, i, j, rng.uniform(-1, 1, size=i.size))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[200, 500, 1000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    if _accel.HAVE_NUMBA:
        decompose(complete_graph(4, rng), use_numba=True)  # compile
    print(f"{'nodes':>6} {'edges':>8} {'numba [s]':>10} {'fallback [s]':>13} {'same':>5}")
    for n in args.sizes:
        g = complete_graph(n, rng)
        slow = best_of(lambda: decompose(g, use_numba=False), args.repeat)
        ref = decompose(g, use_numba=False)
        if _accel.HAVE_NUMBA:
            fast = best_of(lambda: decompose(g, use_numba=True), args.repeat)
            got = decompose(g, use_numba=True)
            same = np.array_equal(got.births, ref.births) and np.array_equal(got.deaths, ref.deaths)
            print(f"{n:>6} {g.num_edges:>8} {fast:>10.4f} {slow:>13.4f} {str(same):>5}")
        else:
            print(f"{n:>6} {g.num_edges:>8} {'n/a':>10} {slow:>13.4f} {'-':>5}")


if __name__ == "__main__":
    main()
