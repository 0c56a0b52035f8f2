"""Corpus data model: publications, reference edges, citation index.

A corpus is an immutable snapshot. Reference edges whose cited endpoint does
not resolve to a publication are retained as *unlinked* references; only
linked edges produce citation events.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import DataError

DEFAULT_CITABLE_TYPES = frozenset({"article", "review", "letter"})

PUBLICATION_FIELDS = ("pub_id", "year", "journal_id", "doc_type", "categories")
REFERENCE_FIELDS = ("citing_id", "cited_id")


@dataclass(frozen=True)
class Publication:
    pub_id: str
    year: int
    journal_id: str
    categories: tuple[str, ...]
    doc_type: str

    def __post_init__(self):
        if not self.pub_id:
            raise DataError("publication with empty pub_id")
        if not self.categories:
            raise DataError(f"publication {self.pub_id!r} has no categories")
        if len(set(self.categories)) != len(self.categories):
            raise DataError(f"publication {self.pub_id!r} has duplicate categories")


@dataclass(frozen=True)
class ReferenceEdge:
    citing_id: str
    cited_id: str


@dataclass(frozen=True)
class CorpusConfig:
    horizon_year: int
    citable_types: frozenset[str] = DEFAULT_CITABLE_TYPES
    year_min: int | None = None

    def to_dict(self) -> dict:
        return {
            "horizon_year": self.horizon_year,
            "citable_types": sorted(self.citable_types),
            "year_min": self.year_min,
        }


class Corpus:
    """Immutable snapshot of publications plus directed reference edges.

    Edges are stored in columnar form; ``iter_edges`` materializes
    ``ReferenceEdge`` rows on demand. All derived indices are pure functions
    of the snapshot and may be shared across threads.
    """

    def __init__(
        self,
        publications: Sequence[Publication],
        edges: Iterable[tuple[str, str]],
        horizon_year: int,
        citable_types: frozenset[str] = DEFAULT_CITABLE_TYPES,
        year_min: int | None = None,
    ):
        publications = tuple(publications)
        if not publications:
            raise DataError("corpus has no publications")
        self.publications = publications
        self.horizon_year = int(horizon_year)
        self.citable_types = frozenset(citable_types)
        self.year_min = year_min

        self._row_of: dict[str, int] = {}
        for row, pub in enumerate(publications):
            if pub.pub_id in self._row_of:
                raise DataError(f"duplicate pub_id {pub.pub_id!r}")
            self._row_of[pub.pub_id] = row
            if pub.year > self.horizon_year:
                raise DataError(
                    f"publication {pub.pub_id!r}: year {pub.year} beyond "
                    f"horizon {self.horizon_year}"
                )
            if year_min is not None and pub.year < year_min:
                raise DataError(
                    f"publication {pub.pub_id!r}: year {pub.year} before "
                    f"configured minimum {year_min}"
                )

        self.years = np.array([p.year for p in publications], dtype=np.int64)

        # Unknown cited ids are factorized into an extended id space so that
        # duplicate/self-edge checks stay integer-based.
        citing_rows: list[int] = []
        cited_codes: list[int] = []
        cited_raw: list[str] = []
        extra: dict[str, int] = {}
        n = len(publications)
        for citing_id, cited_id in edges:
            citing_id = sys.intern(citing_id)
            cited_id = sys.intern(cited_id)
            crow = self._row_of.get(citing_id)
            if crow is None:
                raise DataError(
                    f"reference edge {citing_id!r} -> {cited_id!r}: unknown citing_id"
                )
            if citing_id == cited_id:
                raise DataError(f"self-citation edge rejected for {citing_id!r}")
            code = self._row_of.get(cited_id)
            if code is None:
                code = extra.setdefault(cited_id, n + len(extra))
            citing_rows.append(crow)
            cited_codes.append(code)
            cited_raw.append(cited_id)

        self._edge_citing = np.array(citing_rows, dtype=np.int64)
        self._edge_cited_code = np.array(cited_codes, dtype=np.int64)
        self._edge_cited_raw = cited_raw
        total_ids = n + len(extra)
        if self._edge_citing.size:
            key = self._edge_citing * total_ids + self._edge_cited_code
            uniq, counts = np.unique(key, return_counts=True)
            if np.any(counts > 1):
                bad = int(np.flatnonzero(counts > 1)[0])
                pos = int(np.flatnonzero(key == uniq[bad])[0])
                raise DataError(
                    "duplicate reference edge "
                    f"{publications[citing_rows[pos]].pub_id!r} -> {cited_raw[pos]!r}"
                )

        self._linked_mask = self._edge_cited_code < n
        self.n_edges = int(self._edge_citing.size)
        self.n_linked = int(self._linked_mask.sum())
        self.n_unlinked = self.n_edges - self.n_linked

        self._citable_mask = np.array(
            [p.doc_type in self.citable_types for p in publications], dtype=bool
        )
        self._journal_codes: np.ndarray | None = None
        self._journal_labels: list[str] | None = None
        self._out_linked: dict[str, tuple[str, ...]] | None = None
        self._journal_year: dict[tuple[str, int], tuple[str, ...]] | None = None

    # -- basic lookups ------------------------------------------------------

    def __contains__(self, pub_id: str) -> bool:
        return pub_id in self._row_of

    def __len__(self) -> int:
        return len(self.publications)

    def publication(self, pub_id: str) -> Publication:
        try:
            return self.publications[self._row_of[pub_id]]
        except KeyError:
            raise DataError(f"unknown pub_id {pub_id!r}") from None

    def row_of(self, pub_id: str) -> int:
        return self._row_of[pub_id]

    def iter_edges(self) -> Iterator[ReferenceEdge]:
        pubs = self.publications
        for crow, cited in zip(self._edge_citing, self._edge_cited_raw):
            yield ReferenceEdge(pubs[crow].pub_id, cited)

    @property
    def citable_publications(self) -> tuple[Publication, ...]:
        return tuple(p for p, m in zip(self.publications, self._citable_mask) if m)

    def citable_rows(self) -> np.ndarray:
        return np.flatnonzero(self._citable_mask)

    # -- columnar views used by the batch scoring paths ----------------------

    def linked_edge_rows(self) -> tuple[np.ndarray, np.ndarray]:
        """(citing_row, cited_row) for linked edges only."""
        return (
            self._edge_citing[self._linked_mask],
            self._edge_cited_code[self._linked_mask],
        )

    def journal_codes(self) -> tuple[np.ndarray, list[str]]:
        """Per-publication journal code plus the code -> journal_id table."""
        if self._journal_codes is None:
            labels: dict[str, int] = {}
            codes = np.empty(len(self.publications), dtype=np.int64)
            for row, pub in enumerate(self.publications):
                codes[row] = labels.setdefault(pub.journal_id, len(labels))
            self._journal_codes = codes
            self._journal_labels = list(labels)
        return self._journal_codes, self._journal_labels

    # -- lazy adjacency for the per-publication reference functions ----------

    def linked_refs_of(self, pub_id: str) -> tuple[str, ...]:
        """Cited pub_ids of the publication's linked references, sorted."""
        if self._out_linked is None:
            adj: dict[str, list[str]] = {}
            pubs = self.publications
            for crow, code in zip(
                self._edge_citing[self._linked_mask],
                self._edge_cited_code[self._linked_mask],
            ):
                adj.setdefault(pubs[crow].pub_id, []).append(pubs[code].pub_id)
            self._out_linked = {k: tuple(sorted(v)) for k, v in adj.items()}
        self.publication(pub_id)
        return self._out_linked.get(pub_id, ())

    def journal_year_members(self, journal_id: str, year: int) -> tuple[str, ...]:
        """All publications (any doc type) in a journal-year cohort."""
        if self._journal_year is None:
            cohorts: dict[tuple[str, int], list[str]] = {}
            for pub in self.publications:
                cohorts.setdefault((pub.journal_id, pub.year), []).append(pub.pub_id)
            self._journal_year = {k: tuple(v) for k, v in cohorts.items()}
        return self._journal_year.get((journal_id, year), ())


class CitationIndex:
    """Per cited publication, the linked citation events (citing id, year).

    Entries are ordered by citing pub_id; every publication has an entry,
    possibly empty.
    """

    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        citing, cited = corpus.linked_edge_rows()
        # order events by (cited row, citing pub_id)
        id_rank = np.argsort(
            np.argsort([p.pub_id for p in corpus.publications], kind="stable"),
            kind="stable",
        )
        order = np.lexsort((id_rank[citing], cited))
        self._citing = citing[order]
        self._cited = cited[order]
        self._citing_years = corpus.years[self._citing]
        counts = np.bincount(self._cited, minlength=len(corpus)).astype(np.int64)
        self._offsets = np.zeros(len(corpus) + 1, dtype=np.int64)
        np.cumsum(counts, out=self._offsets[1:])

    def __len__(self) -> int:
        return int(self._citing.size)

    def events_of_row(self, row: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self._offsets[row], self._offsets[row + 1]
        return self._citing[lo:hi], self._citing_years[lo:hi]

    def citations(self, pub_id: str) -> tuple[tuple[str, int], ...]:
        row = self.corpus.row_of(pub_id)
        citing, years = self.events_of_row(row)
        pubs = self.corpus.publications
        return tuple((pubs[c].pub_id, int(y)) for c, y in zip(citing, years))

    def __getitem__(self, pub_id: str) -> tuple[tuple[str, int], ...]:
        return self.citations(pub_id)


def build_citation_index(corpus: Corpus) -> CitationIndex:
    """Invert the linked reference edges into a citation index."""
    return CitationIndex(corpus)


def count_citations(index: CitationIndex, pub: Publication, window: tuple[int, int]) -> int:
    """Citation events of ``pub`` with citing year inside the closed window."""
    lo, hi = int(window[0]), int(window[1])
    if lo > hi:
        raise DataError(f"invalid citation window [{lo}, {hi}]")
    if lo < pub.year:
        raise DataError(
            f"citation window [{lo}, {hi}] starts before publication year {pub.year}"
        )
    _, years = index.events_of_row(index.corpus.row_of(pub.pub_id))
    return int(np.count_nonzero((years >= lo) & (years <= hi)))


@dataclass
class ValidationReport:
    n_publications: int
    n_citable: int
    n_edges: int
    n_linked: int
    n_unlinked: int
    unlinked_ratio: float
    per_year: dict[int, int]
    per_category: dict[str, int]
    n_citing_before_cited: int
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_publications": self.n_publications,
            "n_citable": self.n_citable,
            "n_edges": self.n_edges,
            "n_linked": self.n_linked,
            "n_unlinked": self.n_unlinked,
            "unlinked_ratio": self.unlinked_ratio,
            "per_year": {str(k): v for k, v in sorted(self.per_year.items())},
            "per_category": dict(sorted(self.per_category.items())),
            "n_citing_before_cited": self.n_citing_before_cited,
            "warnings": list(self.warnings),
        }


def validate_corpus(corpus: Corpus) -> ValidationReport:
    """Tally the corpus and surface soft anomalies; never mutates."""
    per_year: dict[int, int] = {}
    per_category: dict[str, int] = {}
    for pub in corpus.publications:
        per_year[pub.year] = per_year.get(pub.year, 0) + 1
        for cat in pub.categories:
            per_category[cat] = per_category.get(cat, 0) + 1

    citing, cited = corpus.linked_edge_rows()
    n_before = int(np.count_nonzero(corpus.years[citing] < corpus.years[cited]))

    warnings = []
    if n_before:
        warnings.append(
            f"{n_before} linked reference(s) have citing year earlier than cited year"
        )

    return ValidationReport(
        n_publications=len(corpus),
        n_citable=int(corpus.citable_rows().size),
        n_edges=corpus.n_edges,
        n_linked=corpus.n_linked,
        n_unlinked=corpus.n_unlinked,
        unlinked_ratio=(corpus.n_unlinked / corpus.n_edges) if corpus.n_edges else 0.0,
        per_year=per_year,
        per_category=per_category,
        n_citing_before_cited=n_before,
        warnings=warnings,
    )


# -- file formats -----------------------------------------------------------
#
# Publications: .tsv (header: pub_id, year, journal_id, doc_type, categories
# with ';'-separated categories) or .jsonl (one object per line, categories
# as an array). References: .tsv (header: citing_id, cited_id) or .jsonl.


def _format_of(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix == ".tsv":
        return "tsv"
    if suffix == ".jsonl":
        return "jsonl"
    raise DataError(f"{path}: unsupported file extension (expected .tsv or .jsonl)")


def read_publications(path) -> list[Publication]:
    path = Path(path)
    fmt = _format_of(path)
    pubs: list[Publication] = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "tsv":
            reader = csv.reader(fh, delimiter="\t")
            header = next(reader, None)
            if header != list(PUBLICATION_FIELDS):
                raise DataError(
                    f"{path}:1: expected header {list(PUBLICATION_FIELDS)}, got {header}"
                )
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 5:
                    raise DataError(f"{path}:{lineno}: expected 5 fields, got {len(row)}")
                pub_id, year_s, journal_id, doc_type, cats = row
                try:
                    year = int(year_s)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: year {year_s!r} is not an integer")
                try:
                    pubs.append(
                        Publication(
                            pub_id=sys.intern(pub_id),
                            year=year,
                            journal_id=sys.intern(journal_id),
                            categories=tuple(sys.intern(c) for c in cats.split(";")) if cats else (),
                            doc_type=sys.intern(doc_type),
                        )
                    )
                except DataError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
        else:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    pubs.append(
                        Publication(
                            pub_id=sys.intern(str(obj["pub_id"])),
                            year=int(obj["year"]),
                            journal_id=sys.intern(str(obj["journal_id"])),
                            categories=tuple(sys.intern(str(c)) for c in obj["categories"]),
                            doc_type=sys.intern(str(obj["doc_type"])),
                        )
                    )
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed record ({exc})") from None
                except DataError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from None
    return pubs


def read_references(path) -> list[tuple[str, str]]:
    path = Path(path)
    fmt = _format_of(path)
    refs: list[tuple[str, str]] = []
    with open(path, encoding="utf-8", newline="") as fh:
        if fmt == "tsv":
            reader = csv.reader(fh, delimiter="\t")
            header = next(reader, None)
            if header != list(REFERENCE_FIELDS):
                raise DataError(
                    f"{path}:1: expected header {list(REFERENCE_FIELDS)}, got {header}"
                )
            for lineno, row in enumerate(reader, start=2):
                if len(row) != 2:
                    raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
                refs.append((sys.intern(row[0]), sys.intern(row[1])))
        else:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    refs.append((sys.intern(str(obj["citing_id"])), sys.intern(str(obj["cited_id"]))))
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise DataError(f"{path}:{lineno}: malformed record ({exc})") from None
    return refs


def load_corpus(publications_path, references_path, config: CorpusConfig) -> Corpus:
    """Load and validate a corpus from publication and reference files."""
    pubs = read_publications(publications_path)
    if not pubs:
        raise DataError(f"{publications_path}: no publications")
    refs = read_references(references_path)
    return Corpus(
        pubs,
        refs,
        horizon_year=config.horizon_year,
        citable_types=config.citable_types,
        year_min=config.year_min,
    )


def write_publications(publications: Iterable[Publication], path) -> None:
    path = Path(path)
    fmt = _format_of(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "tsv":
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(PUBLICATION_FIELDS)
            for p in publications:
                writer.writerow(
                    [p.pub_id, p.year, p.journal_id, p.doc_type, ";".join(p.categories)]
                )
        else:
            for p in publications:
                fh.write(
                    json.dumps(
                        {
                            "pub_id": p.pub_id,
                            "year": p.year,
                            "journal_id": p.journal_id,
                            "doc_type": p.doc_type,
                            "categories": list(p.categories),
                        }
                    )
                    + "\n"
                )


def write_references(edges: Iterable[ReferenceEdge], path) -> None:
    path = Path(path)
    fmt = _format_of(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if fmt == "tsv":
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(REFERENCE_FIELDS)
            for e in edges:
                writer.writerow([e.citing_id, e.cited_id])
        else:
            for e in edges:
                fh.write(json.dumps({"citing_id": e.citing_id, "cited_id": e.cited_id}) + "\n")
