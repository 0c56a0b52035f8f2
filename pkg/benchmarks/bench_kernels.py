#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Workload: rank statistics over many reference sets of realistic sizes, and
weighted accumulation over a citation-event stream. Run after building the
extension (``pip install -e . --no-build-isolation``):

    python benchmarks/bench_kernels.py [--sets 20000] [--events 2000000]
"""

import argparse
import time

import numpy as np

from citnorm._kernels import BACKEND, _pykernels

try:
    from citnorm._kernels import _ckernels
except ImportError:
    _ckernels = None


def build_rank_workload(rng, n_sets):
    sizes = np.clip(rng.lognormal(3.0, 1.0, size=n_sets).astype(np.int64), 1, 500)
    offsets = np.zeros(n_sets + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    values = rng.negative_binomial(0.8, 0.1, size=int(sizes.sum())).astype(np.int64)
    # per-set ascending order, as the kernels require
    order = np.lexsort((values, np.repeat(np.arange(n_sets), sizes)))
    return values[order], offsets


def bench(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sets", type=int, default=20_000)
    parser.add_argument("--events", type=int, default=2_000_000)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    values, offsets = build_rank_workload(rng, args.sets)
    idx = rng.integers(0, 100_000, size=args.events).astype(np.int64)
    weights = rng.random(args.events)

    print(f"active backend: {BACKEND}")
    print(f"rank_scan workload: {args.sets} sets, {values.size} members")
    print(f"accumulate workload: {args.events} events into 100000 bins\n")

    rows = []
    t_py = bench(_pykernels.rank_scan, values, offsets)
    rows.append(("rank_scan", "pure-python", t_py, 1.0))
    if _ckernels is not None:
        t_c = bench(_ckernels.rank_scan, values, offsets)
        rows.append(("rank_scan", "compiled", t_c, t_py / t_c))

    t_py = bench(_pykernels.accumulate, idx, weights, 100_000)
    rows.append(("accumulate", "pure-python", t_py, 1.0))
    if _ckernels is not None:
        t_c = bench(_ckernels.accumulate, idx, weights, 100_000)
        rows.append(("accumulate", "compiled", t_c, t_py / t_c))

    print(f"{'kernel':<12}{'backend':<14}{'best (ms)':>12}{'speedup':>10}")
    for kernel, backend, t, speedup in rows:
        print(f"{kernel:<12}{backend:<14}{t * 1e3:>12.2f}{speedup:>10.2f}x")

    if _ckernels is not None:
        out_c = _ckernels.rank_scan(values, offsets)
        out_p = _pykernels.rank_scan(values, offsets)
        assert all(np.array_equal(a, b) for a, b in zip(out_c, out_p))
        print("\nresult parity: identical")
    else:
        print("\ncompiled kernels not built; showing fallback only")


if __name__ == "__main__":
    main()
