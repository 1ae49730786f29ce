"""Time the compiled and pure-Python kernel backends on pipeline-sized inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from helicality._backend import available_backends
from helicality.helix import convex_hull


def inputs(seed=0):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0.0, 2.0, 24)
    pts = np.c_[np.cos(th), np.sin(th)] + rng.normal(0, 0.02, (24, 2))
    hull = convex_hull(pts)
    w = np.full((72, 72), np.inf)
    for i in range(72):
        for j in rng.choice(72, 3, replace=False):
            if i != j:
                w[i, j] = w[j, i] = rng.uniform(0.1, 2.0)
    for i in range(71):
        w[i, i + 1] = w[i + 1, i] = rng.uniform(0.1, 2.0)
    a = rng.normal(size=(72, 72))
    return pts, hull, w, a + a.T


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    pts, hull, w, sym = inputs()
    cases = {
        "frank_wolfe": lambda k: k.frank_wolfe(pts, hull.vertices, hull.barycenter, 1e-9, 10000),
        "dijkstra_all_pairs": lambda k: k.dijkstra_all_pairs(w),
        "floyd_warshall": lambda k: k.floyd_warshall(w),
        "jacobi_eigh": lambda k: k.jacobi_eigh(sym),
    }
    backends = available_backends()
    names = sorted(backends)
    print(f"{'kernel':<20}" + "".join(f"{n:>14}" for n in names) + ("      speedup" if len(names) > 1 else ""))
    for case, fn in cases.items():
        times = {}
        for n in names:
            k = backends[n]
            times[n] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        row = f"{case:<20}" + "".join(f"{times[n] * 1e3:>11.2f} ms" for n in names)
        if "cython" in times:
            row += f"{times['python'] / times['cython']:>12.1f}x"
        print(row)


if __name__ == "__main__":
    main()
