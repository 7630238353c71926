"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--graphs 200] [--repeat 3]

Both backends get identical inputs taken from seeded benchmark-sized graphs,
and their outputs are checked for equality before anything is timed.
"""
from __future__ import annotations

import argparse
import time

from causalbench import _pykernels
from causalbench.graph import generate_graph
from causalbench.oracles import Path, _signature, adjustment_candidates

try:
    from causalbench import _ckernels
except ImportError:
    _ckernels = None

SHAPES = ([1] * 6, [2] * 5, [2] * 6, [3] * 5, [3] * 6)


def workload(n_graphs: int):
    """One (cause tier 1, last tier) pair per graph, with the inputs each kernel needs."""
    jobs = []
    for i in range(n_graphs):
        g = generate_graph(SHAPES[i % len(SHAPES)], 3 + i % 4, (0.1, 0.1, 0.1), seed=i)
        x, y = g.tier_nodes(1)[0], g.tier_nodes(g.shape.n_tiers - 1)[-1]
        paths = _pykernels.backdoor_paths(g.child_masks, g.parent_masks, x, y, -1)
        cands = adjustment_candidates(g, x, y)
        cmask = sum(1 << v for v in cands)
        sigs = set()
        for nodes, dirs in paths:
            nc, col = _signature(g, Path(nodes, dirs))
            col = tuple(sorted({c & cmask for c in col}))
            if not (col and col[0] == 0):
                sigs.add((nc & cmask, col))
        jobs.append((g, x, y, sorted(sigs), cands))
    return jobs


def kernels_for(mod):
    return {
        "directed_paths": lambda j: mod.directed_paths(j[0].child_masks, j[1], j[2]),
        "backdoor_paths": lambda j: mod.backdoor_paths(j[0].child_masks, j[0].parent_masks, j[1], j[2], -1),
        "minimal_sets": lambda j: mod.minimal_blocking_sets(j[3], j[4], 4),
    }


def best_of(fn, jobs, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        for j in jobs:
            fn(j)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graphs", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    jobs = workload(args.graphs)
    py = kernels_for(_pykernels)
    cy = kernels_for(_ckernels) if _ckernels else None
    if cy is None:
        print("compiled extension not available; timing the Python kernels only")

    print(f"{args.graphs} graphs, best of {args.repeat}")
    print(f"{'kernel':<16}{'python (ms)':>13}{'cython (ms)':>13}{'speedup':>10}")
    for name, fn in py.items():
        if cy is not None:
            for j in jobs:
                assert sorted(fn(j)) == sorted(cy[name](j)), f"{name} disagrees between backends"
        tp = best_of(fn, jobs, args.repeat) * 1e3
        if cy is None:
            print(f"{name:<16}{tp:>13.1f}")
            continue
        tc = best_of(cy[name], jobs, args.repeat) * 1e3
        print(f"{name:<16}{tp:>13.1f}{tc:>13.1f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
