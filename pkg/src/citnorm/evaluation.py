"""Validation pipeline: rank correlations, dummy regression with cluster
bootstrap, predictive margins, and the per-category citation summary.

The regression is a least-squares fit of a z-transformed indicator on
recommendation-level dummies with "good" as the reference category, so the
fitted coefficients are identically group-mean differences and the
predictive margins are the group means; both identities are asserted by the
test suite rather than assumed here.
"""

from __future__ import annotations

import csv
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import atanh, sqrt, tanh
from pathlib import Path
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .corpus import Corpus
from .errors import DataError
from .ranking import midranks
from .refsets import ACTIVE_MULTI_CATEGORY_RULE
from .table import IndicatorTable

SCORE_LEVELS = (1, 2, 3)
LEVEL_NAMES = {1: "good", 2: "very_good", 3: "excellent"}
LEVEL_LABELS = {1: "Good", 2: "Very good", 3: "Excellent"}
REGRESSION_TERMS = ("constant", "very_good", "excellent")

_NORMAL = NormalDist()
_Z95 = 1.96

RECOMMENDATION_FIELDS = ("pub_id", "rater_id", "score", "seq")


@dataclass(frozen=True)
class RecommendationRecord:
    """One expert rating: Good / Very good / Exceptional = 1 / 2 / 3."""

    pub_id: str
    rater_id: str
    score: int
    seq: int

    def __post_init__(self):
        if self.score not in SCORE_LEVELS:
            raise DataError(
                f"recommendation for {self.pub_id!r}: score {self.score} not in {{1, 2, 3}}"
            )


def load_recommendations(path) -> list[RecommendationRecord]:
    path = Path(path)
    suffix = path.suffix.lower()
    records: list[RecommendationRecord] = []

    def make(pub_id, rater_id, score, seq, lineno):
        try:
            return RecommendationRecord(
                pub_id=sys.intern(str(pub_id)),
                rater_id=sys.intern(str(rater_id)),
                score=int(score),
                seq=int(seq),
            )
        except (TypeError, ValueError):
            raise DataError(f"{path}:{lineno}: malformed recommendation row") from None
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None

    with open(path, encoding="utf-8", newline="") as fh:
        if suffix == ".tsv":
            reader = csv.reader(fh, delimiter="\t")
            header = next(reader, None)
            if header != list(RECOMMENDATION_FIELDS):
                raise DataError(
                    f"{path}:1: expected header {list(RECOMMENDATION_FIELDS)}, got {header}"
                )
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 4:
                    raise DataError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
                records.append(make(*row, lineno))
        elif suffix == ".jsonl":
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    records.append(
                        make(obj["pub_id"], obj["rater_id"], obj["score"], obj["seq"], lineno)
                    )
                except (json.JSONDecodeError, KeyError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed record ({exc})") from None
        else:
            raise DataError(f"{path}: unsupported format (expected .tsv or .jsonl)")

    seen_rater: set[tuple[str, str]] = set()
    seen_seq: set[tuple[str, int]] = set()
    for rec in records:
        if (rec.pub_id, rec.rater_id) in seen_rater:
            raise DataError(f"duplicate (pub_id, rater_id) pair ({rec.pub_id!r}, {rec.rater_id!r})")
        if (rec.pub_id, rec.seq) in seen_seq:
            raise DataError(f"duplicate seq {rec.seq} for pub_id {rec.pub_id!r}")
        seen_rater.add((rec.pub_id, rec.rater_id))
        seen_seq.add((rec.pub_id, rec.seq))
    return records


def write_recommendations(records: Iterable[RecommendationRecord], path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if path.suffix.lower() == ".tsv":
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(RECOMMENDATION_FIELDS)
            for r in records:
                writer.writerow([r.pub_id, r.rater_id, r.score, r.seq])
        else:
            for r in records:
                fh.write(
                    json.dumps(
                        {"pub_id": r.pub_id, "rater_id": r.rater_id, "score": r.score, "seq": r.seq}
                    )
                    + "\n"
                )


def dedup_first_recommendation(
    records: Sequence[RecommendationRecord],
) -> list[RecommendationRecord]:
    """Keep the minimum-seq record per publication; output ordered by pub_id."""
    first: dict[str, RecommendationRecord] = {}
    for rec in records:
        cur = first.get(rec.pub_id)
        if cur is None or rec.seq < cur.seq:
            first[rec.pub_id] = rec
    return [first[pid] for pid in sorted(first)]


# -- correlation ------------------------------------------------------------


def spearman(x, y) -> float:
    """Rank correlation: Pearson correlation of mid-ranks (tie-robust)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("spearman expects two equal-length 1-D vectors")
    if x.size < 3:
        raise DataError("spearman needs at least 3 observations")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DataError("spearman inputs must be finite")
    rx = midranks(x)
    ry = midranks(y)
    sx = rx - rx.mean()
    sy = ry - ry.mean()
    denom = sqrt(float(sx @ sx) * float(sy @ sy))
    if denom == 0.0:
        raise DataError("undefined correlation: constant input vector")
    return float(sx @ sy) / denom


def spearman_ci(rho: float, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Fisher-transform confidence interval with SE 1/sqrt(n - 3)."""
    if n < 4:
        raise DataError("confidence interval needs n >= 4")
    if abs(rho) >= 1.0:
        warnings.warn("degenerate interval at |rho| = 1", stacklevel=2)
        return (rho, rho)
    if confidence == 0.95:
        zcrit = _Z95
    else:
        zcrit = _NORMAL.inv_cdf(0.5 + confidence / 2.0)
    z = atanh(rho)
    half = zcrit / sqrt(n - 3)
    return (tanh(z - half), tanh(z + half))


# -- regression -------------------------------------------------------------


def z_transform(values) -> np.ndarray:
    """Center and scale to mean 0, sample standard deviation 1 (ddof=1)."""
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise DataError("z-transform needs at least 2 values")
    sd = v.std(ddof=1)
    if sd == 0.0:
        raise DataError("z-transform undefined for constant input")
    return (v - v.mean()) / sd


@dataclass
class RegressionResult:
    """Dummy regression of a z-scored indicator on recommendation levels."""

    coef: dict[str, float]
    se: dict[str, float] | None = None
    tstat: dict[str, float] | None = None
    reps: int | None = None
    seed: int | None = None

    def p_value(self, term: str) -> float | None:
        if self.tstat is None:
            return None
        t = self.tstat[term]
        return 2.0 * (1.0 - _NORMAL.cdf(abs(t)))

    def stars(self, term: str) -> str:
        p = self.p_value(term)
        return "***" if p is not None and p < 0.001 else ""

    def to_dict(self) -> dict:
        out: dict = {"coef": self.coef}
        if self.se is not None:
            out["se"] = self.se
            out["t"] = self.tstat
            out["stars"] = {t: self.stars(t) for t in REGRESSION_TERMS}
            out["reps"] = self.reps
            out["seed"] = self.seed
        return out


def _level_stats(z: np.ndarray, scores: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per recommendation level: record count and z-sum."""
    codes = scores - 1
    counts = np.bincount(codes, minlength=3).astype(np.float64)
    sums = np.bincount(codes, weights=z, minlength=3)
    return counts, sums


def _solve_dummy(counts: np.ndarray, sums: np.ndarray) -> np.ndarray:
    """Least-squares coefficients (constant, very_good, excellent) from the
    normal equations of the dummy design [1, score==2, score==3]."""
    n = counts.sum()
    xtx = np.array(
        [
            [n, counts[1], counts[2]],
            [counts[1], counts[1], 0.0],
            [counts[2], 0.0, counts[2]],
        ]
    )
    xty = np.array([sums.sum(), sums[1], sums[2]])
    return np.linalg.solve(xtx, xty)


def fit_dummy_regression(z, records) -> RegressionResult:
    """Point estimates; ``records`` may be RecommendationRecords or raw scores."""
    scores = _scores_array(records)
    z = np.asarray(z, dtype=np.float64)
    if z.shape != scores.shape:
        raise DataError("z vector and records must align")
    counts, sums = _level_stats(z, scores)
    missing = [LEVEL_LABELS[i + 1] for i in range(3) if counts[i] == 0]
    if missing:
        raise DataError(f"recommendation level(s) absent: {', '.join(missing)}")
    b = _solve_dummy(counts, sums)
    return RegressionResult(coef=dict(zip(REGRESSION_TERMS, map(float, b))))


def _scores_array(records) -> np.ndarray:
    if len(records) and isinstance(records[0], RecommendationRecord):
        return np.array([r.score for r in records], dtype=np.int64)
    return np.asarray(records, dtype=np.int64)


def cluster_bootstrap(
    z,
    records: Sequence[RecommendationRecord],
    reps: int,
    seed: int,
    threads: int = 1,
) -> np.ndarray:
    """Replicate coefficients from resampling whole publications.

    Clusters (pub_ids) are resampled with replacement to the original
    cluster count; a replicate missing a recommendation level is redrawn
    from the same substream (at most 100 draws per replicate, i.e.
    100 * reps in total). Each replicate seeds its own generator from
    (seed, replicate), so serial and threaded runs agree bit-for-bit.
    """
    if reps < 2:
        raise DataError("bootstrap needs reps >= 2")
    z = np.asarray(z, dtype=np.float64)
    scores = _scores_array(records)
    if z.shape != scores.shape:
        raise DataError("z vector and records must align")
    clusters = sorted({r.pub_id for r in records})
    cid_of = {pid: i for i, pid in enumerate(clusters)}
    cid = np.array([cid_of[r.pub_id] for r in records], dtype=np.int64)
    n_clusters = len(clusters)

    # per-cluster, per-level record counts and z sums; a replicate's normal
    # equations are sums of these over the drawn clusters
    codes = scores - 1
    flat = cid * 3 + codes
    cl_counts = np.bincount(flat, minlength=n_clusters * 3).reshape(n_clusters, 3)
    cl_sums = np.bincount(flat, weights=z, minlength=n_clusters * 3).reshape(n_clusters, 3)
    cl_counts = cl_counts.astype(np.float64)

    coefs = np.empty((reps, 3), dtype=np.float64)

    def one_rep(r: int) -> None:
        rng = np.random.default_rng((seed, r))
        for _ in range(100):
            draw = rng.integers(0, n_clusters, size=n_clusters)
            counts = cl_counts[draw].sum(axis=0)
            if np.all(counts > 0):
                sums = cl_sums[draw].sum(axis=0)
                coefs[r] = _solve_dummy(counts, sums)
                return
        raise DataError(
            f"bootstrap replicate {r}: no valid draw with every recommendation "
            f"level after 100 attempts"
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one_rep, range(reps)))
    else:
        for r in range(reps):
            one_rep(r)
    return coefs


def regression_with_bootstrap(
    z,
    records: Sequence[RecommendationRecord],
    reps: int,
    seed: int,
    threads: int = 1,
) -> tuple[RegressionResult, np.ndarray]:
    """Full fit plus bootstrap SEs and t statistics."""
    fit = fit_dummy_regression(z, records)
    replicates = cluster_bootstrap(z, records, reps=reps, seed=seed, threads=threads)
    se = replicates.std(axis=0, ddof=1)
    result = RegressionResult(
        coef=fit.coef,
        se=dict(zip(REGRESSION_TERMS, map(float, se))),
        tstat={
            t: (fit.coef[t] / s if (s := float(se[i])) > 0 else 0.0)
            for i, t in enumerate(REGRESSION_TERMS)
        },
        reps=reps,
        seed=seed,
    )
    return result, replicates


@dataclass
class MarginsResult:
    """Predicted indicator level per recommendation category."""

    levels: dict[str, dict]  # name -> {margin, ci_low, ci_high, n}

    def to_dict(self) -> dict:
        return dict(self.levels)


def predictive_margins(
    fit: RegressionResult,
    records: Sequence[RecommendationRecord],
    replicates: np.ndarray | None = None,
    ci_method: str = "normal",
) -> MarginsResult:
    """Model predictions at each recommendation level, with bootstrap CIs.

    For this saturated one-factor model the margin at a level is the fitted
    group mean; its CI comes from the same bootstrap replicates as the
    coefficient SEs (normal approximation, or percentile behind the flag).
    """
    scores = _scores_array(records)
    sizes = np.bincount(scores - 1, minlength=3)
    b0 = fit.coef["constant"]
    margins = np.array([b0, b0 + fit.coef["very_good"], b0 + fit.coef["excellent"]])

    levels: dict[str, dict] = {}
    if replicates is not None:
        rep_margins = np.column_stack(
            [
                replicates[:, 0],
                replicates[:, 0] + replicates[:, 1],
                replicates[:, 0] + replicates[:, 2],
            ]
        )
        if ci_method == "percentile":
            lows = np.quantile(rep_margins, 0.025, axis=0)
            highs = np.quantile(rep_margins, 0.975, axis=0)
        elif ci_method == "normal":
            se = rep_margins.std(axis=0, ddof=1)
            lows = margins - _Z95 * se
            highs = margins + _Z95 * se
        else:
            raise DataError(f"unknown ci_method {ci_method!r}")
    else:
        lows = highs = margins

    for i, level in enumerate(SCORE_LEVELS):
        levels[LEVEL_NAMES[level]] = {
            "margin": float(margins[i]),
            "ci_low": float(lows[i]),
            "ci_high": float(highs[i]),
            "n": int(sizes[i]),
        }
    return MarginsResult(levels=levels)


# -- per-category citation summary -------------------------------------------


def category_stats(
    corpus: Corpus, top_k: int | None = 20, combinations: bool = False
) -> list[dict]:
    """Mean/min/max 3-year citations per category (or category combination).

    In combination mode a publication contributes to the single row of its
    full category tuple rather than to one row per category. Rows are sorted
    by paper count, descending, capped at ``top_k``.
    """
    citing, cited = corpus.linked_edge_rows()
    cyears = corpus.years[citing]
    jyears = corpus.years[cited]
    in3 = (cyears >= jyears) & (cyears <= jyears + 2)
    counts3 = np.bincount(cited[in3], minlength=len(corpus))

    groups: dict[str, list[int]] = {}
    for row in corpus.citable_rows():
        pub = corpus.publications[row]
        if combinations:
            keys = [", ".join(sorted(pub.categories))]
        else:
            keys = list(pub.categories)
        for key in keys:
            groups.setdefault(key, []).append(int(counts3[row]))

    rows = [
        {
            "category": key,
            "mean": float(np.mean(vals)),
            "min": int(min(vals)),
            "max": int(max(vals)),
            "n": len(vals),
        }
        for key, vals in groups.items()
    ]
    rows.sort(key=lambda r: (-r["n"], r["category"]))
    return rows[:top_k] if top_k is not None else rows


# -- full evaluation ---------------------------------------------------------


@dataclass
class EvaluationReport:
    """Correlation, regression, and margins tables for every indicator."""

    correlations: dict[str, dict]
    regressions: dict[str, RegressionResult]
    margins: dict[str, MarginsResult]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "correlations": self.correlations,
            "regressions": {k: v.to_dict() for k, v in self.regressions.items()},
            "margins": {k: v.to_dict() for k, v in self.margins.items()},
        }

    def margins_rows(self) -> list[dict]:
        """Plot-ready long-format rows: level, margin, ci_low, ci_high, indicator."""
        rows = []
        for indicator, result in self.margins.items():
            for name, cell in result.levels.items():
                rows.append(
                    {
                        "level": name,
                        "margin": cell["margin"],
                        "ci_low": cell["ci_low"],
                        "ci_high": cell["ci_high"],
                        "indicator": indicator,
                    }
                )
        return rows

    def to_text(self) -> str:
        lines = []
        meta = self.metadata
        lines.append(
            f"records: all={meta.get('n_all')} first-only={meta.get('n_first')} "
            f"papers={meta.get('n_papers')} orphans={meta.get('n_orphan_recommendations')}"
        )
        lines.append("")
        lines.append("Rank correlations (recommendation vs indicator), 95% CI")
        lines.append(f"{'indicator':<14}{'all records':<28}{'first only':<28}")
        for name, cell in self.correlations.items():
            cells = [
                f"{v['rho']:.3f} [{v['ci_low']:.3f}, {v['ci_high']:.3f}]".ljust(28)
                for v in (cell["all"], cell["first_only"])
            ]
            lines.append(f"{name:<14}" + "".join(cells))
        lines.append("")
        lines.append(f"Dummy regression on z-scored indicators ({LEVEL_LABELS[1]} = reference category)")
        lines.append(f"{'indicator':<14}{'Very good':<20}{'Excellent':<20}{'Constant':<20}")
        for name, fit in self.regressions.items():
            cells = []
            for term in ("very_good", "excellent", "constant"):
                t = fit.tstat[term] if fit.tstat else float("nan")
                cells.append(f"{fit.coef[term]:.2f}{fit.stars(term)} ({t:.2f})".ljust(20))
            lines.append(f"{name:<14}" + "".join(cells))
        lines.append("")
        lines.append("Predictive margins with 95% confidence intervals")
        lines.append(f"{'indicator':<14}" + "".join(f"{LEVEL_LABELS[l]:<26}" for l in SCORE_LEVELS))
        for name, result in self.margins.items():
            cells = []
            for level in SCORE_LEVELS:
                cell = result.levels[LEVEL_NAMES[level]]
                cells.append(
                    f"{cell['margin']:.2f} [{cell['ci_low']:.2f}, {cell['ci_high']:.2f}]".ljust(26)
                )
            lines.append(f"{name:<14}" + "".join(cells))
        return "\n".join(lines) + "\n"


def evaluate(
    table: IndicatorTable,
    records: Sequence[RecommendationRecord],
    *,
    reps: int = 100,
    seed: int,
    first_only: bool = False,
    threads: int = 1,
    ci_method: str = "normal",
) -> EvaluationReport:
    """Join indicator scores onto recommendations and run the full pipeline.

    Correlations are reported for all records and for first-only records;
    the regression and margins use all records unless ``first_only`` is set.
    z-scores are recomputed over the joined analysis records so the modeled
    variable has mean 0 / sd 1 on the sample actually fitted.
    """
    lookup = table.row_lookup()
    joined = sorted(
        (r for r in records if r.pub_id in lookup), key=lambda r: (r.pub_id, r.seq)
    )
    n_orphans = len(records) - len(joined)
    if len(joined) < 3:
        raise DataError(f"only {len(joined)} recommendation(s) join the indicator table")

    first = dedup_first_recommendation(joined)
    active = first if first_only else joined

    rows_all = np.array([lookup[r.pub_id] for r in joined], dtype=np.int64)
    rows_first = np.array([lookup[r.pub_id] for r in first], dtype=np.int64)
    rows_active = rows_first if first_only else rows_all
    scores_all = np.array([r.score for r in joined], dtype=np.float64)
    scores_first = np.array([r.score for r in first], dtype=np.float64)

    correlations: dict[str, dict] = {}
    regressions: dict[str, RegressionResult] = {}
    margins: dict[str, MarginsResult] = {}

    for name in table.indicator_names():
        col = table.values(name)
        y_all = col[rows_all]
        y_first = col[rows_first]
        rho_all = spearman(scores_all, y_all)
        rho_first = spearman(scores_first, y_first)
        lo_a, hi_a = spearman_ci(rho_all, len(joined))
        lo_f, hi_f = spearman_ci(rho_first, len(first))
        correlations[name] = {
            "all": {"rho": rho_all, "ci_low": lo_a, "ci_high": hi_a, "n": len(joined)},
            "first_only": {"rho": rho_first, "ci_low": lo_f, "ci_high": hi_f, "n": len(first)},
        }

        z = z_transform(col[rows_active])
        fit, replicates = regression_with_bootstrap(
            z, active, reps=reps, seed=seed, threads=threads
        )
        regressions[name] = fit
        margins[name] = predictive_margins(fit, active, replicates, ci_method=ci_method)

    metadata = {
        "n_all": len(joined),
        "n_first": len(first),
        "n_papers": len({r.pub_id for r in joined}),
        "n_orphan_recommendations": n_orphans,
        "reps": reps,
        "seed": seed,
        "first_only": first_only,
        "ci_method": ci_method,
        "regression_sample": "first_only" if first_only else "all",
        "z_convention": "sample standard deviation (ddof=1) over analysis records",
        "multi_category_rule": ACTIVE_MULTI_CATEGORY_RULE.value,
    }
    for key in ("multi_category_rule", "horizon_year"):
        if key in table.metadata:
            metadata[key] = table.metadata[key]
    return EvaluationReport(
        correlations=correlations,
        regressions=regressions,
        margins=margins,
        metadata=metadata,
    )
