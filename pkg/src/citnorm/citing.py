"""Citing-side indicators: SNCS variants 1-3.

Each citation of a focal publication is weighted by the citing side's
referencing behaviour inside a reference window. The window length ``w``
equals the focal publication's citation-window length
(horizon - pub_year + 1) unless a fixed override is configured; the window
itself is anchored at the citing publication's year: [y - w + 1, y].

Per citation with citing publication *k* in journal-year cohort *J*:

* SNCS1 adds 1 / a, a = mean windowed linked-reference count over all of
  *J*'s publications (zero-reference members included);
* SNCS2 adds 1 / r, r = *k*'s own windowed linked-reference count;
* SNCS3 adds 1 / (p * r), p = share of *J* with at least one windowed
  linked reference.

Cohorts span every publication of the journal-year, citable or not, since
citing behaviour is a property of the journal's whole output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .corpus import CitationIndex, Corpus, Publication, build_citation_index
from .errors import DataError

SNCS_COLUMNS = ("sncs1", "sncs2", "sncs3")


@dataclass(frozen=True)
class CitingContext:
    """Everything one citation contributes to the SNCS sums.

    For an in-window citation the reference window always contains the focal
    publication itself, so ``r >= 1``, ``a > 0``, and ``p > 0``.
    """

    citing_id: str
    year: int
    journal_id: str
    w: int                     # window length in years
    window: tuple[int, int]    # [year - w + 1, year]
    r: int                     # citing publication's windowed linked refs
    a: float                   # cohort mean windowed linked refs
    p: float                   # cohort share with >= 1 windowed linked ref


def linked_reference_count(
    citing: Publication, window: tuple[int, int], corpus: Corpus
) -> int:
    """Linked references of ``citing`` whose cited year falls in the window."""
    lo, hi = int(window[0]), int(window[1])
    total = 0
    for cited_id in corpus.linked_refs_of(citing.pub_id):
        if lo <= corpus.publication(cited_id).year <= hi:
            total += 1
    return total


def journal_year_avg_linked_refs(
    journal_id: str, year: int, w: int, corpus: Corpus
) -> float:
    """Mean windowed linked-reference count over the journal-year cohort."""
    counts = _cohort_counts(journal_id, year, w, corpus)
    return float(np.mean(counts))


def journal_year_linked_share(
    journal_id: str, year: int, w: int, corpus: Corpus
) -> float:
    """Share of the journal-year cohort with at least one windowed linked reference."""
    counts = _cohort_counts(journal_id, year, w, corpus)
    return float(np.count_nonzero(counts) / len(counts))


def _cohort_counts(journal_id: str, year: int, w: int, corpus: Corpus) -> list[int]:
    members = corpus.journal_year_members(journal_id, year)
    if not members:
        raise DataError(f"empty journal-year cohort ({journal_id!r}, {year})")
    window = (year - w + 1, year)
    return [
        linked_reference_count(corpus.publication(pid), window, corpus)
        for pid in members
    ]


class CohortStatistics:
    """Cache of (journal, year, w) -> (avg linked refs, linked share).

    Results are identical with the cache disabled; the flag exists so tests
    can assert that.
    """

    def __init__(self, corpus: Corpus, enabled: bool = True):
        self.corpus = corpus
        self.enabled = enabled
        self._cache: dict[tuple[str, int, int], tuple[float, float]] = {}

    def stats(self, journal_id: str, year: int, w: int) -> tuple[float, float]:
        key = (journal_id, year, w)
        if self.enabled and key in self._cache:
            return self._cache[key]
        counts = _cohort_counts(journal_id, year, w, self.corpus)
        value = (
            float(np.mean(counts)),
            float(np.count_nonzero(counts) / len(counts)),
        )
        if self.enabled:
            self._cache[key] = value
        return value


def _iter_weighted_citations(
    pub: Publication,
    corpus: Corpus,
    index: CitationIndex,
    cohorts: CohortStatistics,
    fixed_window: int | None,
):
    w = fixed_window if fixed_window is not None else corpus.horizon_year - pub.year + 1
    for citing_id, y in index.citations(pub.pub_id):
        if y < pub.year or y > corpus.horizon_year:
            continue
        citing = corpus.publication(citing_id)
        window = (y - w + 1, y)
        r = linked_reference_count(citing, window, corpus)
        a, p = cohorts.stats(citing.journal_id, y, w)
        yield CitingContext(
            citing_id=citing_id,
            year=y,
            journal_id=citing.journal_id,
            w=w,
            window=window,
            r=r,
            a=a,
            p=p,
        )


def sncs1(
    pub: Publication,
    corpus: Corpus,
    index: CitationIndex | None = None,
    *,
    fixed_window: int | None = None,
    cohorts: CohortStatistics | None = None,
) -> float:
    index = index if index is not None else build_citation_index(corpus)
    cohorts = cohorts if cohorts is not None else CohortStatistics(corpus)
    return sum(
        1.0 / ctx.a
        for ctx in _iter_weighted_citations(pub, corpus, index, cohorts, fixed_window)
    )


def sncs2(
    pub: Publication,
    corpus: Corpus,
    index: CitationIndex | None = None,
    *,
    fixed_window: int | None = None,
    cohorts: CohortStatistics | None = None,
) -> float:
    index = index if index is not None else build_citation_index(corpus)
    cohorts = cohorts if cohorts is not None else CohortStatistics(corpus)
    return sum(
        1.0 / ctx.r
        for ctx in _iter_weighted_citations(pub, corpus, index, cohorts, fixed_window)
        if ctx.r > 0
    )


def sncs3(
    pub: Publication,
    corpus: Corpus,
    index: CitationIndex | None = None,
    *,
    fixed_window: int | None = None,
    cohorts: CohortStatistics | None = None,
) -> float:
    index = index if index is not None else build_citation_index(corpus)
    cohorts = cohorts if cohorts is not None else CohortStatistics(corpus)
    return sum(
        1.0 / (ctx.p * ctx.r)
        for ctx in _iter_weighted_citations(pub, corpus, index, cohorts, fixed_window)
        if ctx.r > 0
    )


def score_all_citing_side(
    corpus: Corpus,
    columns: tuple[str, ...] = SNCS_COLUMNS,
    fixed_window: int | None = None,
) -> tuple[dict[str, np.ndarray], dict[str, int]]:
    """SNCS columns for every citable publication, plus the anomaly tally.

    Vectorized equivalent of the per-publication functions: per-publication
    windowed reference counts come from cumulative year histograms, cohort
    statistics from one grouped pass per distinct window length.
    """
    wanted = [c for c in SNCS_COLUMNS if c in columns]
    rows = corpus.citable_rows()
    m = rows.size
    n_pubs = len(corpus)
    years = corpus.years
    y0 = int(years.min()) if n_pubs else 0
    n_years = corpus.horizon_year - y0 + 1

    citing, cited = corpus.linked_edge_rows()

    # per-publication cumulative linked-reference counts by cited year
    hist = np.bincount(
        citing * n_years + (years[cited] - y0), minlength=n_pubs * n_years
    ).reshape(n_pubs, n_years)
    ref_cum = np.cumsum(hist, axis=1)

    year_idx = years - y0

    def windowed_counts(w: int) -> np.ndarray:
        """Per publication: linked refs with cited year in [year - w + 1, year]."""
        hi = ref_cum[np.arange(n_pubs), year_idx]
        lo_idx = year_idx - w
        lo = np.where(lo_idx >= 0, ref_cum[np.arange(n_pubs), np.maximum(lo_idx, 0)], 0)
        return hi - lo

    # citation events of citable publications, restricted to the window
    citable_row_of = np.full(n_pubs, -1, dtype=np.int64)
    citable_row_of[rows] = np.arange(m)
    is_focal = citable_row_of[cited] >= 0
    in_window = years[citing] >= years[cited]
    event_mask = is_focal & in_window
    skipped_out_of_window = int(np.count_nonzero(is_focal & ~in_window))

    e_citing = citing[event_mask]
    e_cited = cited[event_mask]

    if fixed_window is not None:
        if fixed_window < 1:
            raise DataError("fixed SNCS window must be >= 1")
        w_values = [int(fixed_window)]
        e_widx = np.zeros(e_citing.size, dtype=np.int64)
    else:
        focal_years = np.unique(years[e_cited]) if e_cited.size else np.array([], dtype=np.int64)
        w_values = [int(corpus.horizon_year - fy + 1) for fy in focal_years]
        w_of_year = np.zeros(n_years, dtype=np.int64)
        for i, fy in enumerate(focal_years):
            w_of_year[fy - y0] = i
        e_widx = w_of_year[years[e_cited] - y0] if e_cited.size else np.zeros(0, dtype=np.int64)

    r_table = (
        np.stack([windowed_counts(w) for w in w_values])
        if w_values
        else np.zeros((0, n_pubs), dtype=np.int64)
    )

    jcodes, _ = corpus.journal_codes()
    cohort_code = jcodes * n_years + year_idx
    n_cohorts = int(cohort_code.max()) + 1 if n_pubs else 0
    cohort_size = np.bincount(cohort_code, minlength=n_cohorts).astype(np.float64)

    a_table = np.zeros((len(w_values), n_cohorts))
    p_table = np.zeros((len(w_values), n_cohorts))
    for i in range(len(w_values)):
        r_all = r_table[i]
        sums = np.bincount(cohort_code, weights=r_all, minlength=n_cohorts)
        nonzero = np.bincount(cohort_code, weights=(r_all > 0).astype(np.float64), minlength=n_cohorts)
        np.divide(sums, cohort_size, out=a_table[i], where=cohort_size > 0)
        np.divide(nonzero, cohort_size, out=p_table[i], where=cohort_size > 0)

    r_e = r_table[e_widx, e_citing] if e_citing.size else np.zeros(0, dtype=np.int64)
    valid = r_e > 0
    skipped_zero_refs = int(np.count_nonzero(~valid))
    e_citing = e_citing[valid]
    e_cited = e_cited[valid]
    e_widx = e_widx[valid]
    r_e = r_e[valid].astype(np.float64)

    e_cohort = cohort_code[e_citing]
    e_target = citable_row_of[e_cited]

    out: dict[str, np.ndarray] = {}
    if "sncs1" in wanted:
        a_e = a_table[e_widx, e_cohort]
        out["sncs1"] = _kernels.accumulate(e_target, 1.0 / a_e, m)
    if "sncs2" in wanted:
        out["sncs2"] = _kernels.accumulate(e_target, 1.0 / r_e, m)
    if "sncs3" in wanted:
        p_e = p_table[e_widx, e_cohort]
        out["sncs3"] = _kernels.accumulate(e_target, 1.0 / (p_e * r_e), m)

    tally = {
        "skipped_out_of_window": skipped_out_of_window,
        "skipped_zero_linked_refs": skipped_zero_refs,
    }
    return out, tally
