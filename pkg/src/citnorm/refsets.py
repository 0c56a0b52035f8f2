"""Reference sets: (category, publication year) cells of citable publications.

Each cell carries its members' full-horizon citation counts and is the
comparison baseline for every cited-side indicator.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .corpus import CitationIndex, Corpus, build_citation_index
from .errors import DataError


class MultiCategoryRule(str, Enum):
    """How scores of a publication with several categories are combined."""

    MEAN_OF_PER_CATEGORY_SCORES = "mean_of_per_category_scores"


ACTIVE_MULTI_CATEGORY_RULE = MultiCategoryRule.MEAN_OF_PER_CATEGORY_SCORES


@dataclass(frozen=True)
class ReferenceSet:
    category: str
    year: int
    members: tuple[tuple[str, int], ...]  # (pub_id, full-horizon citations)

    def __post_init__(self):
        if not self.members:
            raise DataError(f"empty reference set ({self.category!r}, {self.year})")
        if any(c < 0 for _, c in self.members):
            raise DataError(f"negative citation count in set ({self.category!r}, {self.year})")

    @property
    def n(self) -> int:
        return len(self.members)

    def counts(self) -> np.ndarray:
        return np.array([c for _, c in self.members], dtype=np.int64)

    def member_count(self, pub_id: str) -> int:
        for pid, c in self.members:
            if pid == pub_id:
                return c
        raise DataError(
            f"publication {pub_id!r} not in reference set ({self.category!r}, {self.year})"
        )


def partition_reference_sets(
    corpus: Corpus, index: CitationIndex | None = None
) -> dict[tuple[str, int], ReferenceSet]:
    """Partition citable publications into (category, year) reference sets.

    A publication appears in one set per category it carries. Counts use the
    full-horizon window [pub_year, horizon_year]; citation events dated
    before the cited publication's year are excluded.
    """
    if index is None:
        index = build_citation_index(corpus)

    rows = corpus.citable_rows()
    counts = _full_horizon_counts(corpus)

    cells: dict[tuple[str, int], list[tuple[str, int]]] = {}
    for row in rows:
        pub = corpus.publications[row]
        for cat in pub.categories:
            cells.setdefault((cat, pub.year), []).append((pub.pub_id, int(counts[row])))

    return {
        key: ReferenceSet(category=key[0], year=key[1], members=tuple(sorted(members)))
        for key, members in sorted(cells.items())
    }


def _full_horizon_counts(corpus: Corpus) -> np.ndarray:
    """Per-publication citations over [pub_year, horizon_year]."""
    citing, cited = corpus.linked_edge_rows()
    in_window = corpus.years[citing] >= corpus.years[cited]
    return np.bincount(cited[in_window], minlength=len(corpus)).astype(np.int64)


def expected_citation_rate(ref_set: ReferenceSet) -> float:
    """Arithmetic mean citation count of the set's members."""
    return float(ref_set.counts().mean())


def combine_multi_category(per_category_scores: Sequence[float]) -> float:
    """Combine per-category scores under the active rule (arithmetic mean)."""
    if len(per_category_scores) == 0:
        raise DataError("cannot combine an empty list of per-category scores")
    return float(np.mean(np.asarray(per_category_scores, dtype=np.float64)))


def reference_set_rows(sets: Mapping[tuple[str, int], ReferenceSet]) -> list[dict]:
    """Diagnostic rows (category, year, n, mean, min, max), one per set."""
    rows = []
    for key in sorted(sets):
        s = sets[key]
        counts = s.counts()
        rows.append(
            {
                "category": s.category,
                "year": s.year,
                "n": s.n,
                "mean": float(counts.mean()),
                "min": int(counts.min()),
                "max": int(counts.max()),
            }
        )
    return rows
