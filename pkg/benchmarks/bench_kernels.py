"""Compare the compiled and pure-Python kernels on the hot paths.

    python benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]

Each case runs the same inputs on every available backend, checks that the
outputs agree, and prints wall time per call and the speedup.
"""
import argparse
import time

import numpy as np

from jamlim import _backend
from jamlim.field import Box
from jamlim.scheme import nn_exclusion


def cases(scale):
    s1, s2 = nn_exclusion(1, 1), nn_exclusion(2, 1)
    o1, t1, u1 = s1.kernel_args()
    o2, t2, u2 = s2.kernel_args()
    t2b = nn_exclusion(2, 1, "linf").to_table()
    o3, t3, u3 = t2b.kernel_args()
    rng = np.random.default_rng(0)
    coords = rng.integers(-(10**6), 10**6, size=(int(2 * 10**5 * scale), 2))
    window = Box.centered(2, 10).sites()
    n_perfect = max(2, int(2000 * scale))
    n_box = max(2, int(200 * scale))
    return [
        ("field_values 2D", "field_values", (7, coords)),
        ("armour_bfs 2D box r=10", "armour_bfs", (7, window, 1, 10**7)),
        ("perfect_batch 1D origin", "perfect_batch", (0, n_perfect, np.zeros((1, 1), np.int64), 1, o1, t1, u1, 10**7)),
        ("perfect_batch 2D origin", "perfect_batch", (0, n_perfect, np.zeros((1, 2), np.int64), 1, o2, t2, u2, 10**7)),
        ("box_batch 1D n=100", "box_batch", (0, n_box, 1, 100, 1, o1, t1, u1, 0, np.zeros(0, np.int64))),
        ("box_batch 2D n=10", "box_batch", (0, n_box, 2, 10, 1, o2, t2, u2, 1, np.zeros(0, np.int64))),
        ("box_batch 2D n=10 table", "box_batch", (0, n_box, 2, 10, 1, o3, t3, u3, 0, np.zeros(0, np.int64))),
    ]


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.dtype.kind == "f":
        # armour values come out in visit order, which may differ between backends
        return np.array_equal(np.sort(a), np.sort(b))
    return np.array_equal(a, b)


def timeit(fn, args, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--scale", type=float, default=1.0, help="multiply workload sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    impls = _backend.available()
    names = sorted(impls)
    print(f"{'case':28s}" + "".join(f"{n:>12s}" for n in names) + f"{'speedup':>10s}  match")
    for label, kernel, kargs in cases(args.scale):
        times, outs = {}, {}
        for n in names:
            times[n], outs[n] = timeit(getattr(impls[n], kernel), kargs, args.repeat)
        match = all(same(outs[names[0]], outs[n]) for n in names[1:])
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:28s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in names) + f"{speed:9.1f}x  {match}")


if __name__ == "__main__":
    main()
