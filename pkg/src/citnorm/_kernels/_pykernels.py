"""Pure-numpy implementations of the hot kernels.

Selected when the compiled extension is unavailable (or when
``CITNORM_PURE_PYTHON=1``). Results are bit-identical to the compiled
versions; only speed differs.
"""

from __future__ import annotations

import numpy as np


def rank_scan(sorted_values, offsets):
    """Rank statistics over concatenated, per-group-sorted value runs.

    ``sorted_values`` holds the values of every group back to back, ascending
    within each group; ``offsets`` is the CSR-style boundary array
    (``offsets[g]:offsets[g+1]`` is group ``g``).

    Returns four arrays: per-element ascending mid-rank (1-based, ties
    averaged), per-element strict-lower count (group members with a strictly
    smaller value), per-element 0-based rank among the group's unique values,
    and the per-group number of unique values.
    """
    values = np.asarray(sorted_values)
    offsets = np.asarray(offsets, dtype=np.int64)
    n = values.size
    n_groups = offsets.size - 1
    if n == 0:
        return (
            np.zeros(0, dtype=np.float64),
            np.zeros(0, dtype=np.int64),
            np.zeros(0, dtype=np.int64),
            np.zeros(n_groups, dtype=np.int64),
        )
    sizes = np.diff(offsets)
    group_of = np.repeat(np.arange(n_groups, dtype=np.int64), sizes)

    new_run = np.ones(n, dtype=bool)
    new_run[1:] = (values[1:] != values[:-1]) | (group_of[1:] != group_of[:-1])
    run_id = np.cumsum(new_run) - 1
    run_first = np.flatnonzero(new_run)
    run_len = np.diff(np.append(run_first, n))

    first = run_first[run_id]
    count = run_len[run_id]
    start = offsets[group_of]

    strict_lower = first - start
    midrank = strict_lower + (count + 1) / 2.0

    run_group = group_of[run_first]
    n_unique = np.bincount(run_group, minlength=n_groups).astype(np.int64)
    first_run_of_group = np.concatenate(([0], np.cumsum(n_unique)[:-1]))
    unique_rank = run_id - first_run_of_group[group_of]

    return midrank, strict_lower.astype(np.int64), unique_rank.astype(np.int64), n_unique


def accumulate(idx, weights, size):
    """Sum ``weights`` into ``size`` bins addressed by ``idx``."""
    return np.bincount(idx, weights=weights, minlength=size).astype(np.float64)
