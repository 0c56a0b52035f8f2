"""Rank-statistic helpers shared by the indicator and statistics modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class GroupedRanks:
    """Per-element rank statistics within groups, in original element order."""

    midrank: np.ndarray       # ascending 1-based mid-ranks, ties averaged
    strict_lower: np.ndarray  # group members with a strictly smaller value
    unique_rank: np.ndarray   # 0-based rank among the group's unique values
    group_size: np.ndarray    # per element
    n_unique: np.ndarray      # per group


def grouped_rank_stats(values, group_ids, n_groups: int) -> GroupedRanks:
    """Compute rank statistics of ``values`` within each group.

    ``group_ids`` must be integers in ``[0, n_groups)``; elements of a group
    need not be contiguous.
    """
    values = np.asarray(values)
    gids = np.ascontiguousarray(group_ids, dtype=np.int64)
    if values.shape != gids.shape:
        raise ValueError("values and group_ids must have equal length")
    order = np.lexsort((values, gids))
    sizes = np.bincount(gids, minlength=n_groups).astype(np.int64)
    offsets = np.zeros(n_groups + 1, dtype=np.int64)
    np.cumsum(sizes, out=offsets[1:])
    mid_s, low_s, uniq_s, n_unique = _kernels.rank_scan(values[order], offsets)
    inv = np.empty_like(order)
    inv[order] = np.arange(order.size)
    return GroupedRanks(
        midrank=mid_s[inv],
        strict_lower=low_s[inv],
        unique_rank=uniq_s[inv],
        group_size=sizes[gids],
        n_unique=n_unique,
    )


def midranks(values) -> np.ndarray:
    """1-based mid-ranks (ties averaged) of a 1-D array."""
    v = np.asarray(values)
    if v.ndim != 1:
        raise ValueError("midranks expects a 1-D array")
    return grouped_rank_stats(v, np.zeros(v.size, dtype=np.int64), 1).midrank
