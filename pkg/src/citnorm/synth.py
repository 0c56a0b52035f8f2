"""Reproducible synthetic corpora with field- and year-dependent citation
cultures, plus coupled expert recommendations.

Per field, citation targets are drawn from a negative binomial whose mean is
the field rate scaled by a declining year factor; each target citation is
realized as a reference edge from a same-field publication published within
the cited paper's 3-year window. Every publication then tops its linked
reference list up to a Poisson draw around the field's mean (pointing at
non-citable filler publications so article citation counts stay on target)
and emits unlinked references according to the field's linked-reference
share. Journal-year cohorts therefore carry realistic linked-reference
profiles for the citing-side indicators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .corpus import Corpus, Publication
from .errors import DataError
from .evaluation import RecommendationRecord
from .ranking import grouped_rank_stats

_NORMAL = NormalDist()

_REDRAW_ROUNDS = 200


@dataclass(frozen=True)
class FieldProfile:
    label: str
    mean_citations: float
    dispersion: float        # negative-binomial size; smaller = more skewed
    mean_linked_refs: float
    linked_ref_share: float

    def __post_init__(self):
        if self.mean_citations < 0 or self.mean_linked_refs < 0:
            raise DataError(f"field {self.label!r}: rates must be >= 0")
        if self.dispersion <= 0:
            raise DataError(f"field {self.label!r}: dispersion must be > 0")
        if not 0 < self.linked_ref_share <= 1:
            raise DataError(f"field {self.label!r}: linked_ref_share must be in (0, 1]")


@dataclass(frozen=True)
class GeneratorSpec:
    fields: tuple[FieldProfile, ...]
    year_min: int
    year_max: int
    papers_per_field_year: int
    journals_per_field: int
    coupling: float
    seed: int | None = None
    year_rate_start: float = 22.53   # declining per-year citation-rate trend,
    year_rate_end: float = 7.34      # normalized so the factors average to 1
    filler_share: float = 0.08
    rec_share: float = 0.5

    def __post_init__(self):
        if not self.fields:
            raise DataError("generator spec needs at least one field")
        if self.year_min > self.year_max:
            raise DataError("year_min must not exceed year_max")
        if self.papers_per_field_year < 1 or self.journals_per_field < 1:
            raise DataError("papers_per_field_year and journals_per_field must be >= 1")
        if not 0 <= self.coupling <= 1:
            raise DataError("coupling must be in [0, 1]")
        if not 0 <= self.rec_share <= 1:
            raise DataError("rec_share must be in [0, 1]")

    @property
    def n_years(self) -> int:
        return self.year_max - self.year_min + 1

    def year_factors(self) -> np.ndarray:
        if self.n_years == 1:
            return np.ones(1)
        trend = np.linspace(self.year_rate_start, self.year_rate_end, self.n_years)
        return trend / trend.mean()

    def to_dict(self) -> dict:
        return {
            "fields": [
                {
                    "label": f.label,
                    "mean_citations": f.mean_citations,
                    "dispersion": f.dispersion,
                    "mean_linked_refs": f.mean_linked_refs,
                    "linked_ref_share": f.linked_ref_share,
                }
                for f in self.fields
            ],
            "year_min": self.year_min,
            "year_max": self.year_max,
            "papers_per_field_year": self.papers_per_field_year,
            "journals_per_field": self.journals_per_field,
            "coupling": self.coupling,
            "seed": self.seed,
            "year_rate_start": self.year_rate_start,
            "year_rate_end": self.year_rate_end,
            "filler_share": self.filler_share,
            "rec_share": self.rec_share,
        }

    @classmethod
    def from_dict(cls, obj: dict, seed: int | None = None) -> "GeneratorSpec":
        try:
            fields = tuple(FieldProfile(**f) for f in obj["fields"])
            kwargs = {k: obj[k] for k in (
                "year_min", "year_max", "papers_per_field_year",
                "journals_per_field", "coupling",
            )}
        except (KeyError, TypeError) as exc:
            raise DataError(f"invalid generator spec: {exc}") from None
        for opt in ("year_rate_start", "year_rate_end", "filler_share", "rec_share"):
            if opt in obj:
                kwargs[opt] = obj[opt]
        kwargs["seed"] = seed if seed is not None else obj.get("seed")
        return cls(fields=fields, **kwargs)

    @classmethod
    def from_file(cls, path, seed: int | None = None) -> "GeneratorSpec":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"{path}: cannot read generator spec ({exc})") from None
        return cls.from_dict(obj, seed=seed)

    @classmethod
    def preset(cls, name: str, seed: int | None = None, **overrides) -> "GeneratorSpec":
        try:
            base = PRESETS[name]
        except KeyError:
            raise DataError(f"unknown preset {name!r} (have: {', '.join(sorted(PRESETS))})")
        obj = base.to_dict()
        obj.update(overrides)
        return cls.from_dict(obj, seed=seed)


PRESETS = {
    # Two citation cultures: the lower-rate field also carries proportionally
    # fewer linked references, which is what lets the citing-side indicators
    # flatten the field effect.
    "two-cultures": GeneratorSpec(
        fields=(
            FieldProfile("engineering", 10.77, 1.0, 21.5, 0.85),
            FieldProfile("medicine", 16.85, 1.0, 33.7, 0.85),
        ),
        year_min=2007,
        year_max=2010,
        papers_per_field_year=12500,
        journals_per_field=25,
        coupling=0.6,
    ),
    # Sparse linked-reference coverage; normalization degrades here.
    "humanities-stress": GeneratorSpec(
        fields=(FieldProfile("humanities", 3.5, 0.8, 4.0, 0.3),),
        year_min=2007,
        year_max=2010,
        papers_per_field_year=2000,
        journals_per_field=10,
        coupling=0.6,
    ),
}


def _dedup_redraw(key_of, redraw, n_events: int, what: str) -> None:
    """Redraw colliding events until all keys are unique, bounded rounds."""
    for _ in range(_REDRAW_ROUNDS):
        keys = key_of()
        _, first_idx = np.unique(keys, return_index=True)
        bad = np.ones(n_events, dtype=bool)
        bad[first_idx] = False
        bad |= keys < 0  # self-edges are flagged with a negative key
        if not bad.any():
            return
        redraw(np.flatnonzero(bad))
    raise DataError(f"could not place {what} without collisions; spec too tight")


def generate_corpus(spec: GeneratorSpec) -> Corpus:
    """Materialize a corpus from the spec; deterministic under its seed."""
    if spec.seed is None:
        raise DataError("generator spec has no seed; synthesis must be seeded")
    rng = np.random.default_rng([int(spec.seed), 0])

    years = np.arange(spec.year_min, spec.year_max + 1)
    yfac = spec.year_factors()
    # the filler pool must absorb any single publication's reference top-up,
    # even for first-year publications whose window only reaches one pool
    min_filler = int(np.ceil(3 * max(f.mean_linked_refs for f in spec.fields) + 10))
    n_filler = max(2, round(spec.filler_share * spec.papers_per_field_year), min_filler)

    publications: list[Publication] = []
    field_of: list[int] = []
    is_article: list[bool] = []

    for fi, profile in enumerate(spec.fields):
        for yi, year in enumerate(years):
            journals = rng.integers(
                0, spec.journals_per_field, size=spec.papers_per_field_year + n_filler
            )
            for i in range(spec.papers_per_field_year):
                publications.append(
                    Publication(
                        pub_id=f"{profile.label}-{year}-a{i:05d}",
                        year=int(year),
                        journal_id=f"J-{profile.label}-{journals[i]:02d}",
                        categories=(profile.label,),
                        doc_type="article",
                    )
                )
                field_of.append(fi)
                is_article.append(True)
            for i in range(n_filler):
                publications.append(
                    Publication(
                        pub_id=f"{profile.label}-{year}-x{i:05d}",
                        year=int(year),
                        journal_id=f"J-{profile.label}-{journals[spec.papers_per_field_year + i]:02d}",
                        categories=(profile.label,),
                        doc_type="other",
                    )
                )
                field_of.append(fi)
                is_article.append(False)

    n_pubs = len(publications)
    pub_years = np.array([p.year for p in publications], dtype=np.int64)
    field_arr = np.array(field_of, dtype=np.int64)
    article_mask = np.array(is_article, dtype=bool)
    year_idx = pub_years - spec.year_min
    n_years = spec.n_years

    # pools of potential citers / filler targets per (field, year)
    pool_id = field_arr * n_years + year_idx

    def build_pools(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        rows = np.flatnonzero(mask)
        order = np.argsort(pool_id[rows], kind="stable")
        rows = rows[order]
        sizes = np.bincount(pool_id[mask], minlength=len(spec.fields) * n_years)
        offsets = np.zeros(sizes.size + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        return rows, offsets, sizes

    all_rows, all_off, all_sizes = build_pools(np.ones(n_pubs, dtype=bool))
    fil_rows, fil_off, fil_sizes = build_pools(~article_mask)

    # citation targets per article
    art_rows = np.flatnonzero(article_mask)
    mu = np.array(
        [spec.fields[field_arr[r]].mean_citations * yfac[year_idx[r]] for r in art_rows]
    )
    size = np.array([spec.fields[field_arr[r]].dispersion for r in art_rows])
    targets = rng.negative_binomial(size, size / (size + mu))

    # feasibility: distinct same-field citers within the citing window
    span_years = np.minimum(pub_years[art_rows] + 2, spec.year_max) - pub_years[art_rows] + 1
    avail = np.zeros(art_rows.size, dtype=np.int64)
    for off in range(3):
        y = np.minimum(year_idx[art_rows] + off, n_years - 1)
        ok = off < span_years
        avail[ok] += all_sizes[field_arr[art_rows] * n_years + y][ok]
    avail -= 1  # the article itself sits in its own year pool
    over = targets > avail
    if np.any(over):
        i = int(np.flatnonzero(over)[0])
        raise DataError(
            f"infeasible spec: {publications[art_rows[i]].pub_id} needs "
            f"{int(targets[i])} citations but only {int(avail[i])} distinct "
            f"same-field publications exist in its citation window"
        )

    # realize citation events
    e_cited = np.repeat(art_rows, targets)
    e_span = np.repeat(span_years, targets)
    n_events = e_cited.size
    e_year_off = rng.integers(0, e_span) if n_events else np.zeros(0, dtype=np.int64)
    e_citer = np.zeros(n_events, dtype=np.int64)

    def draw_citers(idx: np.ndarray) -> None:
        pid = field_arr[e_cited[idx]] * n_years + year_idx[e_cited[idx]] + e_year_off[idx]
        pos = rng.integers(0, all_sizes[pid])
        e_citer[idx] = all_rows[all_off[pid] + pos]

    def redraw_events(idx: np.ndarray) -> None:
        e_year_off[idx] = rng.integers(0, e_span[idx])
        draw_citers(idx)

    if n_events:
        draw_citers(np.arange(n_events))
        _dedup_redraw(
            lambda: np.where(e_citer == e_cited, -1 - e_cited, e_citer * n_pubs + e_cited),
            redraw_events,
            n_events,
            "citation edges",
        )

    # top up linked references toward the field profile, aimed at filler pubs
    mean_refs = np.array([spec.fields[f].mean_linked_refs for f in field_arr])
    ref_targets = rng.poisson(mean_refs)
    baseline = np.bincount(e_citer, minlength=n_pubs) if n_events else np.zeros(n_pubs, dtype=np.int64)
    topup = np.maximum(0, ref_targets - baseline)

    t_citer = np.repeat(np.arange(n_pubs), topup)
    n_top = t_citer.size
    t_back = np.minimum(2, year_idx[t_citer])  # years reachable below the citing year
    t_citer_fil = np.zeros(n_top, dtype=np.int64)

    fil_avail = np.zeros(n_pubs, dtype=np.int64)
    for off in range(3):
        y = year_idx - off
        ok = y >= 0
        fil_avail[ok] += fil_sizes[field_arr * n_years + np.maximum(y, 0)][ok]
    over = topup > fil_avail - (~article_mask).astype(np.int64)
    if np.any(over):
        r = int(np.flatnonzero(over)[0])
        raise DataError(
            f"infeasible spec: {publications[r].pub_id} needs {int(topup[r])} "
            f"extra linked references but the filler pool holds only "
            f"{int(fil_avail[r])}; raise filler_share or lower mean_linked_refs"
        )

    def draw_topup(idx: np.ndarray) -> None:
        off = rng.integers(0, t_back[idx] + 1)
        pid = field_arr[t_citer[idx]] * n_years + (year_idx[t_citer[idx]] - off)
        pos = rng.integers(0, fil_sizes[pid])
        t_citer_fil[idx] = fil_rows[fil_off[pid] + pos]

    if n_top:
        draw_topup(np.arange(n_top))
        _dedup_redraw(
            lambda: np.where(
                t_citer == t_citer_fil, -1 - t_citer, t_citer * n_pubs + t_citer_fil
            ),
            draw_topup,
            n_top,
            "top-up references",
        )

    # unlinked references per the field's linked-reference share
    unlinked_rate = mean_refs * (1.0 - np.array(
        [spec.fields[f].linked_ref_share for f in field_arr]
    )) / np.array([spec.fields[f].linked_ref_share for f in field_arr])
    n_unlinked = rng.poisson(unlinked_rate)
    u_citer = np.repeat(np.arange(n_pubs), n_unlinked)

    def edge_iter():
        pubs = publications
        for k, j in zip(e_citer, e_cited):
            yield (pubs[k].pub_id, pubs[j].pub_id)
        for k, j in zip(t_citer, t_citer_fil):
            yield (pubs[k].pub_id, pubs[j].pub_id)
        for i, k in enumerate(u_citer):
            yield (pubs[k].pub_id, f"EXT-{i:08d}")

    return Corpus(
        publications,
        edge_iter(),
        horizon_year=spec.year_max,
        year_min=spec.year_min,
    )


def generate_recommendations(
    corpus: Corpus,
    coupling: float,
    seed: int,
    rec_share: float = 0.5,
    level_split: tuple[float, float, float] = (0.59, 0.35, 0.06),
) -> list[RecommendationRecord]:
    """Expert ratings coupled to a latent impact signal.

    The latent signal of a paper is the normal quantile of its citation-count
    percentile within its (category, year) cell, so at coupling 1 scores are
    a noise-free monotone function of realized impact. Better papers attract
    more raters, mirroring how multiply-recommended papers behave.
    """
    if not 0 <= coupling <= 1:
        raise DataError("coupling must be in [0, 1]")
    rng = np.random.default_rng([int(seed), 1])

    rows = corpus.citable_rows()
    m = rows.size
    citing, cited = corpus.linked_edge_rows()
    in_window = corpus.years[citing] >= corpus.years[cited]
    counts = np.bincount(cited[in_window], minlength=len(corpus))[rows]

    group_key: dict[tuple[str, int], int] = {}
    gid = np.empty(m, dtype=np.int64)
    for i, row in enumerate(rows):
        pub = corpus.publications[row]
        gid[i] = group_key.setdefault((pub.categories[0], pub.year), len(group_key))
    gr = grouped_rank_stats(counts, gid, len(group_key))
    pct = gr.midrank / (gr.group_size + 1.0)
    latent = np.array([_NORMAL.inv_cdf(p) for p in pct])

    k = int(round(rec_share * m))
    chosen = np.sort(rng.choice(m, size=k, replace=False)) if k else np.zeros(0, dtype=np.int64)

    # rater count mildly increases with latent quality
    bucket = np.digitize(latent[chosen], [0.0, 0.6745])
    c1 = np.array([0.80, 0.65, 0.45])[bucket]
    c2 = np.array([0.95, 0.90, 0.78])[bucket]
    u = rng.random(k)
    n_raters = 1 + (u > c1).astype(np.int64) + (u > c2).astype(np.int64)

    total = int(n_raters.sum())
    noise = rng.standard_normal(total)
    zr = coupling * np.repeat(latent[chosen], n_raters) + np.sqrt(1.0 - coupling**2) * noise
    t1 = _NORMAL.inv_cdf(level_split[0])
    t2 = _NORMAL.inv_cdf(level_split[0] + level_split[1])
    scores = 1 + (zr > t1).astype(np.int64) + (zr > t2).astype(np.int64)

    records: list[RecommendationRecord] = []
    rater = 0
    order = np.argsort([corpus.publications[rows[i]].pub_id for i in chosen], kind="stable")
    starts = np.zeros(k, dtype=np.int64)
    if k > 1:
        np.cumsum(n_raters[:-1], out=starts[1:])
    for oi in order:
        pid = corpus.publications[rows[chosen[oi]]].pub_id
        for seq in range(1, int(n_raters[oi]) + 1):
            records.append(
                RecommendationRecord(
                    pub_id=pid,
                    rater_id=f"r{rater:07d}",
                    score=int(scores[starts[oi] + seq - 1]),
                    seq=seq,
                )
            )
            rater += 1
    return records
