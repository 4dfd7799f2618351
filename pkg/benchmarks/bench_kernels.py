"""Compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--quick]

Prints the best-of-``repeat`` wall time for each kernel and the speed-up.
Outputs of the two backends are checked for equality before timing.
"""

import argparse
import time

import numpy as np

from phdim import _fallback
from phdim._backend import COMPILED
from phdim.geometry import pairwise_distances
from phdim.persistence import _edges, _rank_matrix

if COMPILED:
    from phdim import _kernels


def best_of(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def reduce_case(x):
    vals, R = _rank_matrix(pairwise_distances(x))
    n = len(x)
    max_rank = int(np.searchsorted(vals, float(pairwise_distances(x).max(axis=1).min()), side="right")) - 1
    iu, ju, er, _ = _edges(R, max_rank)
    tree = np.asarray(_fallback.kruskal_select(iu.astype(np.int64), ju.astype(np.int64), n)).astype(np.uint8)
    verts = np.ascontiguousarray(np.column_stack([iu, ju]).astype(np.int32))
    args = (R, verts, np.ascontiguousarray(er.astype(np.int32)), tree, max_rank, np.int64(n) ** 3)
    return lambda mod: mod.rips_reduce(*args)


def cases(quick):
    rng = np.random.default_rng(0)
    sizes = [500, 2000] if quick else [500, 2000, 6000]
    for n in sizes:
        x = np.ascontiguousarray(rng.random((n, 2)))
        yield f"prim_mst n={n}", lambda mod, x=x: mod.prim_mst(x, False)
    for n in ([2000] if quick else [2000, 8000]):
        x = np.ascontiguousarray(rng.random((n, 2)))
        r = np.ascontiguousarray(np.geomspace(0.001, 0.1, 6))
        yield f"pair_counts n={n}", lambda mod, x=x, r=r: mod.pair_counts_below(x, r)
    for n in ([150] if quick else [150, 400]):
        yield f"rips_reduce PH1 n={n}", reduce_case(rng.random((n, 2)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    if not COMPILED:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'kernel':<26}{'compiled s':>12}{'python s':>12}{'speed-up':>10}")
    for name, fn in cases(args.quick):
        tc, a = best_of(lambda: fn(_kernels), args.repeat)
        tp, b = best_of(lambda: fn(_fallback), max(1, args.repeat // 2))
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        assert np.array_equal(np.asarray(a[0]), np.asarray(b[0])), name
        print(f"{name:<26}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
