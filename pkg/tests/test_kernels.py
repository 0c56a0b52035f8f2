"""Kernel contracts: brute-force oracles and compiled/pure parity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citnorm import _kernels
from citnorm._kernels import _pykernels
from citnorm.ranking import grouped_rank_stats, midranks

HAS_COMPILED = _kernels.BACKEND == "compiled"


def brute_rank_stats(values):
    """O(n^2) per-element rank statistics for one group."""
    n = len(values)
    mid, lower, uniq = [], [], []
    unique_sorted = sorted(set(values))
    for v in values:
        below = sum(1 for w in values if w < v)
        ties = sum(1 for w in values if w == v)
        # mean of occupied 1-based positions below+1 .. below+ties
        mid.append(below + (ties + 1) / 2.0)
        lower.append(below)
        uniq.append(unique_sorted.index(v))
    return mid, lower, uniq, len(unique_sorted)


def test_rank_scan_matches_brute_force():
    rng = np.random.default_rng(1)
    for _ in range(200):
        size = int(rng.integers(1, 40))
        values = rng.integers(0, 6, size=size)  # heavy ties
        gr = grouped_rank_stats(values, np.zeros(size, dtype=np.int64), 1)
        mid, lower, uniq, n_unique = brute_rank_stats(list(values))
        assert np.allclose(gr.midrank, mid)
        assert np.array_equal(gr.strict_lower, lower)
        assert np.array_equal(gr.unique_rank, uniq)
        assert gr.n_unique[0] == n_unique


def test_rank_scan_multiple_groups():
    rng = np.random.default_rng(2)
    values = rng.integers(0, 4, size=50)
    gids = rng.integers(0, 5, size=50)
    gr = grouped_rank_stats(values, gids, 5)
    for g in range(5):
        mask = gids == g
        if not mask.any():
            continue
        mid, lower, uniq, n_unique = brute_rank_stats(list(values[mask]))
        assert np.allclose(gr.midrank[mask], mid)
        assert np.array_equal(gr.strict_lower[mask], lower)
        assert np.array_equal(gr.unique_rank[mask], uniq)
        assert gr.n_unique[g] == n_unique


@settings(deadline=None, max_examples=60)
@given(st.lists(st.integers(min_value=0, max_value=8), min_size=1, max_size=60))
def test_midranks_sum_to_triangular_number(values):
    n = len(values)
    assert midranks(values).sum() == pytest.approx(n * (n + 1) / 2)


@settings(deadline=None, max_examples=60)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=32), min_size=1, max_size=40))
def test_midranks_work_on_floats(values):
    n = len(values)
    assert midranks(values).sum() == pytest.approx(n * (n + 1) / 2)


def test_accumulate_matches_bincount():
    rng = np.random.default_rng(3)
    idx = rng.integers(0, 20, size=500)
    w = rng.random(500)
    out = _kernels.accumulate(idx, w, 20)
    assert np.allclose(out, np.bincount(idx, weights=w, minlength=20))


def test_accumulate_rejects_out_of_range():
    with pytest.raises(ValueError):
        _kernels.accumulate([0, 25], [1.0, 1.0], 3)


def test_rank_scan_rejects_bad_offsets():
    with pytest.raises(ValueError):
        _kernels.rank_scan([1, 2, 3], [0, 2])


def test_empty_inputs():
    mid, lower, uniq, n_unique = _kernels.rank_scan([], [0, 0])
    assert mid.size == lower.size == uniq.size == 0
    assert n_unique.tolist() == [0]
    assert _kernels.accumulate([], [], 4).tolist() == [0, 0, 0, 0]


@pytest.mark.skipif(not HAS_COMPILED, reason="compiled kernels not built")
def test_compiled_matches_pure_python():
    from citnorm._kernels import _ckernels

    rng = np.random.default_rng(4)
    for trial in range(50):
        n_groups = int(rng.integers(1, 8))
        sizes = rng.integers(0, 30, size=n_groups)
        offsets = np.zeros(n_groups + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        values = np.concatenate(
            [np.sort(rng.integers(0, 5, size=s)) for s in sizes]
        ).astype(np.int64) if sizes.sum() else np.zeros(0, dtype=np.int64)
        out_c = _ckernels.rank_scan(values, offsets)
        out_p = _pykernels.rank_scan(values, offsets)
        for a, b in zip(out_c, out_p):
            assert np.array_equal(a, b)

        idx = rng.integers(0, 11, size=40).astype(np.int64)
        w = rng.random(40)
        assert np.allclose(_ckernels.accumulate(idx, w, 11), _pykernels.accumulate(idx, w, 11))
