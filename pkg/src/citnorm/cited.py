"""Cited-side indicators: MNCS, inverted InCites, Hazen, P100, P100'.

Tie handling, fixed once for all callers:

* Hazen uses ascending mid-ranks, so the set mean is exactly 50.
* InCites uses the descending maximum rank before inversion, which makes the
  inverted value exactly the share of set members with strictly fewer
  citations.
* P100 ranks the set's unique citation counts (0-based, ascending) and
  scales by the highest unique rank.
* P100' ranks by the strict-lower count and always divides by n - 1, which
  is what removes P100's rank-jump paradox.

Degenerate cells: a singleton set yields Hazen 50, InCites 0, P100 0,
P100' 0; a set whose counts are all equal yields P100 0 for every member.
A zero expected rate (all members uncited) defines MNCS as 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _kernels
from .corpus import CitationIndex, Corpus, Publication, count_citations
from .errors import DataError
from .ranking import grouped_rank_stats
from .refsets import ACTIVE_MULTI_CATEGORY_RULE, ReferenceSet, combine_multi_category
from .table import IndicatorTable


@dataclass(frozen=True)
class RankContext:
    """Rank statistics of one reference set, aligned with ``set.members``."""

    n: int
    unique_counts: tuple[int, ...]       # ascending
    midrank: tuple[float, ...]           # ascending 1-based mid-ranks
    strict_lower: tuple[int, ...]        # members with strictly fewer citations
    desc_max_rank: tuple[int, ...]       # maximum rank in descending order
    unique_rank: tuple[int, ...]         # 0-based rank among unique counts

    @property
    def i_max_unique(self) -> int:
        return len(self.unique_counts) - 1

    @classmethod
    def from_reference_set(cls, ref_set: ReferenceSet) -> "RankContext":
        counts = ref_set.counts()
        gr = grouped_rank_stats(counts, np.zeros(counts.size, dtype=np.int64), 1)
        return cls(
            n=ref_set.n,
            unique_counts=tuple(int(c) for c in np.unique(counts)),
            midrank=tuple(float(m) for m in gr.midrank),
            strict_lower=tuple(int(s) for s in gr.strict_lower),
            desc_max_rank=tuple(int(ref_set.n - s) for s in gr.strict_lower),
            unique_rank=tuple(int(u) for u in gr.unique_rank),
        )


def raw_citations_3y(pub: Publication, index: CitationIndex, horizon_year: int) -> int:
    """Citations in the 3-calendar-year window [year, year + 2], horizon-capped."""
    return count_citations(index, pub, (pub.year, min(pub.year + 2, horizon_year)))


def _member_pos(ref_set: ReferenceSet, pub_id: str) -> int:
    for i, (pid, _) in enumerate(ref_set.members):
        if pid == pub_id:
            return i
    raise DataError(
        f"publication {pub_id!r} not in reference set "
        f"({ref_set.category!r}, {ref_set.year})"
    )


def mncs(pub: Publication, sets: Mapping[tuple[str, int], ReferenceSet]) -> float:
    """Observed/expected citation quotient, averaged over the pub's categories."""
    ratios = []
    for cat in pub.categories:
        ref_set = sets.get((cat, pub.year))
        if ref_set is None:
            raise DataError(
                f"publication {pub.pub_id!r} has no reference set for "
                f"({cat!r}, {pub.year})"
            )
        observed = ref_set.member_count(pub.pub_id)
        expected = ref_set.counts().mean()
        ratios.append(observed / expected if expected > 0 else 0.0)
    return combine_multi_category(ratios)


def incites_percentile(pub: Publication, ref_set: ReferenceSet) -> float:
    """100 minus the descending-max-rank percentile: the strictly-lower share."""
    ctx = RankContext.from_reference_set(ref_set)
    i = _member_pos(ref_set, pub.pub_id)
    return 100.0 - 100.0 * ctx.desc_max_rank[i] / ctx.n


def hazen_percentile(pub: Publication, ref_set: ReferenceSet) -> float:
    """((mid-rank - 0.5) / n) * 100 on ascending ranks."""
    ctx = RankContext.from_reference_set(ref_set)
    i = _member_pos(ref_set, pub.pub_id)
    return 100.0 * (ctx.midrank[i] - 0.5) / ctx.n


def p100(pub: Publication, ref_set: ReferenceSet) -> float:
    """Unique-count rank scaled to [0, 100]."""
    ctx = RankContext.from_reference_set(ref_set)
    i = _member_pos(ref_set, pub.pub_id)
    if ctx.i_max_unique == 0:
        return 0.0
    return 100.0 * ctx.unique_rank[i] / ctx.i_max_unique


def p100_prime(pub: Publication, ref_set: ReferenceSet) -> float:
    """Strict-lower rank over n - 1, scaled to [0, 100]."""
    ctx = RankContext.from_reference_set(ref_set)
    i = _member_pos(ref_set, pub.pub_id)
    if ctx.n == 1:
        return 0.0
    return 100.0 * ctx.strict_lower[i] / (ctx.n - 1)


CITED_SIDE_COLUMNS = ("citations_3y", "mncs", "incites", "hazen", "p100", "p100_prime")

SET_BASED_COLUMNS = ("mncs", "incites", "hazen", "p100", "p100_prime")


def membership_scores(
    mem_set: np.ndarray,
    mem_count: np.ndarray,
    n_sets: int,
    wanted: tuple[str, ...] = SET_BASED_COLUMNS,
) -> dict[str, np.ndarray]:
    """Per-membership indicator scores for concatenated reference sets.

    ``mem_set`` assigns each membership to a set in ``[0, n_sets)``;
    ``mem_count`` carries the member's full-horizon citation count.
    """
    mem_set = np.ascontiguousarray(mem_set, dtype=np.int64)
    mem_count = np.ascontiguousarray(mem_count, dtype=np.int64)
    gr = grouped_rank_stats(mem_count, mem_set, n_sets)
    n = gr.group_size.astype(np.float64)
    m = mem_count.size

    scores: dict[str, np.ndarray] = {}
    if "mncs" in wanted:
        set_sums = _kernels.accumulate(mem_set, mem_count.astype(np.float64), n_sets)
        set_sizes = np.bincount(mem_set, minlength=n_sets)
        means = np.divide(
            set_sums, set_sizes, out=np.zeros(n_sets), where=set_sizes > 0
        )
        mean_per_mem = means[mem_set]
        scores["mncs"] = np.divide(
            mem_count,
            mean_per_mem,
            out=np.zeros(m, dtype=np.float64),
            where=mean_per_mem > 0,
        )
    if "incites" in wanted:
        scores["incites"] = 100.0 * gr.strict_lower / n
    if "hazen" in wanted:
        scores["hazen"] = 100.0 * (gr.midrank - 0.5) / n
    if "p100" in wanted:
        i_max = (gr.n_unique - 1)[mem_set].astype(np.float64)
        scores["p100"] = np.divide(
            100.0 * gr.unique_rank,
            i_max,
            out=np.zeros(m, dtype=np.float64),
            where=i_max > 0,
        )
    if "p100_prime" in wanted:
        denom = n - 1.0
        scores["p100_prime"] = np.divide(
            100.0 * gr.strict_lower,
            denom,
            out=np.zeros(m, dtype=np.float64),
            where=denom > 0,
        )
    return scores


def score_all_cited_side(
    corpus: Corpus,
    sets: Mapping[tuple[str, int], ReferenceSet],
    index: CitationIndex,
    columns: tuple[str, ...] = CITED_SIDE_COLUMNS,
) -> IndicatorTable:
    """Score every citable publication; one table row per publication.

    Multi-category publications get the mean of their per-set scores. The
    batch path runs on the shared rank kernels and is checked against the
    per-publication functions in the test suite.
    """
    rows = corpus.citable_rows()
    pubs = corpus.publications
    pub_ids = [pubs[r].pub_id for r in rows]
    m = len(pub_ids)
    table_row = {pid: i for i, pid in enumerate(pub_ids)}

    out: dict[str, np.ndarray] = {}
    wanted = [c for c in CITED_SIDE_COLUMNS if c in columns]

    if "citations_3y" in wanted:
        citing, cited = corpus.linked_edge_rows()
        cited_year = corpus.years[cited]
        citing_year = corpus.years[citing]
        in3 = (citing_year >= cited_year) & (citing_year <= cited_year + 2)
        counts3 = np.bincount(cited[in3], minlength=len(corpus))
        out["citations_3y"] = counts3[rows].astype(np.float64)

    set_based = [c for c in wanted if c != "citations_3y"]
    metadata = {
        "horizon_year": corpus.horizon_year,
        "citable_types": sorted(corpus.citable_types),
        "multi_category_rule": ACTIVE_MULTI_CATEGORY_RULE.value,
    }

    if set_based:
        keys = sorted(sets)
        mem_row: list[int] = []
        mem_set: list[int] = []
        mem_count: list[int] = []
        for sid, key in enumerate(keys):
            for pid, cnt in sets[key].members:
                mem_row.append(table_row[pid])
                mem_set.append(sid)
                mem_count.append(cnt)
        mem_row_a = np.array(mem_row, dtype=np.int64)
        mem_set_a = np.array(mem_set, dtype=np.int64)
        mem_count_a = np.array(mem_count, dtype=np.int64)

        scores = membership_scores(mem_set_a, mem_count_a, len(keys), tuple(set_based))

        cats_per_row = np.bincount(mem_row_a, minlength=m).astype(np.float64)
        if np.any(cats_per_row == 0):
            missing = [pub_ids[i] for i in np.flatnonzero(cats_per_row == 0)[:5]]
            raise DataError(f"citable publication(s) missing from reference sets: {missing}")
        for name, vals in scores.items():
            out[name] = _kernels.accumulate(mem_row_a, vals, m) / cats_per_row

        sizes = np.bincount(mem_set_a, minlength=len(keys))
        set_min = np.full(len(keys), np.iinfo(np.int64).max, dtype=np.int64)
        set_max = np.zeros(len(keys), dtype=np.int64)
        np.minimum.at(set_min, mem_set_a, mem_count_a)
        np.maximum.at(set_max, mem_set_a, mem_count_a)
        metadata["n_reference_sets"] = len(keys)
        metadata["n_singleton_sets"] = int(np.count_nonzero(sizes == 1))
        metadata["n_uniform_sets"] = int(
            np.count_nonzero((set_min == set_max) & (sizes > 1))
        )

    if "citations_3y" in wanted:
        truncated = int(np.count_nonzero(corpus.years[rows] + 2 > corpus.horizon_year))
        metadata["n_truncated_3y_windows"] = truncated

    return IndicatorTable(pub_ids=pub_ids, columns=out, metadata=metadata)
