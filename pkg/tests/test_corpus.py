"""Corpus model: loading, validation, citation index, windows."""

import numpy as np
import pytest

from citnorm import (
    Corpus,
    CorpusConfig,
    DataError,
    Publication,
    build_citation_index,
    count_citations,
    load_corpus,
    validate_corpus,
)
from citnorm.corpus import write_publications, write_references

from conftest import random_corpus


def write_corpus_files(tmp_path, pub_rows, ref_rows, fmt="tsv"):
    pubs = tmp_path / f"pubs.{fmt}"
    refs = tmp_path / f"refs.{fmt}"
    if fmt == "tsv":
        pubs.write_text(
            "pub_id\tyear\tjournal_id\tdoc_type\tcategories\n"
            + "".join("\t".join(map(str, r)) + "\n" for r in pub_rows)
        )
        refs.write_text(
            "citing_id\tcited_id\n" + "".join("\t".join(r) + "\n" for r in ref_rows)
        )
    else:
        import json

        pubs.write_text(
            "".join(
                json.dumps(
                    {
                        "pub_id": r[0],
                        "year": r[1],
                        "journal_id": r[2],
                        "doc_type": r[3],
                        "categories": r[4].split(";"),
                    }
                )
                + "\n"
                for r in pub_rows
            )
        )
        refs.write_text(
            "".join(json.dumps({"citing_id": a, "cited_id": b}) + "\n" for a, b in ref_rows)
        )
    return pubs, refs


PUB_ROWS = [
    ("A", 2008, "J1", "article", "X"),
    ("B", 2009, "J1", "article", "X;Y"),
    ("C", 2010, "J2", "review", "Y"),
]


@pytest.mark.parametrize("fmt", ["tsv", "jsonl"])
def test_load_counts_linked_and_unlinked(tmp_path, fmt):
    pubs, refs = write_corpus_files(tmp_path, PUB_ROWS, [("B", "A"), ("C", "A")], fmt)
    corpus = load_corpus(pubs, refs, CorpusConfig(horizon_year=2013))
    assert corpus.n_linked == 2 and corpus.n_unlinked == 0

    pubs, refs = write_corpus_files(tmp_path, PUB_ROWS, [("B", "MISSING")], fmt)
    corpus = load_corpus(pubs, refs, CorpusConfig(horizon_year=2013))
    assert corpus.n_linked == 0 and corpus.n_unlinked == 1


def test_duplicate_pub_id_names_the_id(tmp_path):
    rows = PUB_ROWS + [("A", 2011, "J9", "article", "Z")]
    pubs, refs = write_corpus_files(tmp_path, rows, [])
    with pytest.raises(DataError, match="'A'"):
        load_corpus(pubs, refs, CorpusConfig(horizon_year=2013))


def test_malformed_row_reports_line_number(tmp_path):
    pubs = tmp_path / "pubs.tsv"
    pubs.write_text("pub_id\tyear\tjournal_id\tdoc_type\tcategories\nA\tnotayear\tJ1\tarticle\tX\n")
    refs = tmp_path / "refs.tsv"
    refs.write_text("citing_id\tcited_id\n")
    with pytest.raises(DataError, match=":2"):
        load_corpus(pubs, refs, CorpusConfig(horizon_year=2013))


def test_empty_publications_is_hard_error(tmp_path):
    pubs, refs = write_corpus_files(tmp_path, [], [])
    with pytest.raises(DataError, match="no publications"):
        load_corpus(pubs, refs, CorpusConfig(horizon_year=2013))


def test_unknown_citing_id_rejected():
    with pytest.raises(DataError, match="unknown citing_id"):
        Corpus([Publication("A", 2008, "J", ("X",), "article")], [("Z", "A")], 2013)


def test_self_edge_rejected():
    with pytest.raises(DataError, match="self-citation"):
        Corpus([Publication("A", 2008, "J", ("X",), "article")], [("A", "A")], 2013)


def test_duplicate_edge_rejected():
    pubs = [
        Publication("A", 2008, "J", ("X",), "article"),
        Publication("B", 2009, "J", ("X",), "article"),
    ]
    with pytest.raises(DataError, match="duplicate reference edge"):
        Corpus(pubs, [("B", "A"), ("B", "A")], 2013)


def test_publication_invariants():
    with pytest.raises(DataError, match="no categories"):
        Publication("A", 2008, "J", (), "article")
    with pytest.raises(DataError, match="duplicate categories"):
        Publication("A", 2008, "J", ("X", "X"), "article")


def test_horizon_must_cover_years():
    with pytest.raises(DataError, match="beyond"):
        Corpus([Publication("A", 2014, "J", ("X",), "article")], [], 2013)


def test_year_min_enforced():
    with pytest.raises(DataError, match="before configured minimum"):
        Corpus([Publication("A", 2000, "J", ("X",), "article")], [], 2013, year_min=2005)


def test_round_trip_identical(tmp_path):
    rng = np.random.default_rng(11)
    corpus = random_corpus(rng, n_pubs=20, n_edges=40)
    # add an unlinked edge to exercise its serialization
    edges = list(corpus.iter_edges())
    pubs_path = tmp_path / "pubs.tsv"
    refs_path = tmp_path / "refs.tsv"
    write_publications(corpus.publications, pubs_path)
    write_references(edges, refs_path)
    reloaded = load_corpus(pubs_path, refs_path, CorpusConfig(horizon_year=corpus.horizon_year))
    assert reloaded.publications == corpus.publications
    assert list(reloaded.iter_edges()) == edges

    # byte-identical on re-serialization
    pubs2 = tmp_path / "pubs2.tsv"
    refs2 = tmp_path / "refs2.tsv"
    write_publications(reloaded.publications, pubs2)
    write_references(reloaded.iter_edges(), refs2)
    assert pubs2.read_bytes() == pubs_path.read_bytes()
    assert refs2.read_bytes() == refs_path.read_bytes()


def test_citation_index_inverts_edges():
    pubs = [
        Publication("A", 2009, "J", ("X",), "article"),
        Publication("B", 2008, "J", ("X",), "article"),
        Publication("C", 2010, "J", ("X",), "article"),
    ]
    corpus = Corpus(pubs, [("A", "B"), ("C", "B")], 2013)
    index = build_citation_index(corpus)
    assert index.citations("B") == (("A", 2009), ("C", 2010))
    assert index.citations("A") == ()
    assert index.citations("C") == ()


def test_index_total_events_equals_linked_edges():
    rng = np.random.default_rng(5)
    for _ in range(20):
        corpus = random_corpus(rng, n_pubs=15, n_edges=25)
        index = build_citation_index(corpus)
        total = sum(len(index.citations(p.pub_id)) for p in corpus.publications)
        assert total == corpus.n_linked == len(index)
        for pub in corpus.publications:
            for citing_id, year in index.citations(pub.pub_id):
                assert corpus.publication(citing_id).year == year


def test_index_deterministic():
    rng = np.random.default_rng(6)
    corpus = random_corpus(rng, n_pubs=15, n_edges=30)
    i1 = build_citation_index(corpus)
    i2 = build_citation_index(corpus)
    for pub in corpus.publications:
        assert i1.citations(pub.pub_id) == i2.citations(pub.pub_id)


def test_count_citations_window():
    pubs = [Publication("P", 2008, "J", ("X",), "article")] + [
        Publication(f"C{y}", y, "J", ("X",), "article") for y in (2008, 2009, 2012)
    ]
    corpus = Corpus(pubs, [(f"C{y}", "P") for y in (2008, 2009, 2012)], 2013)
    index = build_citation_index(corpus)
    pub = corpus.publication("P")
    assert count_citations(index, pub, (2008, 2010)) == 2
    assert count_citations(index, pub, (2008, 2013)) == 3
    with pytest.raises(DataError, match="starts before"):
        count_citations(index, pub, (2007, 2010))
    with pytest.raises(DataError, match="invalid"):
        count_citations(index, pub, (2010, 2009))


def test_window_partition_sums_to_full_count():
    rng = np.random.default_rng(7)
    for _ in range(20):
        corpus = random_corpus(rng, n_pubs=12, n_edges=30)
        index = build_citation_index(corpus)
        horizon = corpus.horizon_year
        for pub in corpus.publications:
            full = count_citations(index, pub, (pub.year, horizon))
            cut = int(rng.integers(pub.year, horizon + 1))
            parts = count_citations(index, pub, (pub.year, cut))
            if cut < horizon:
                parts += count_citations(index, pub, (cut + 1, horizon))
            assert parts == full


def test_validate_reports_year_anomaly_softly():
    pubs = [
        Publication("OLD", 2009, "J", ("X",), "article"),
        Publication("NEW", 2010, "J", ("X",), "article"),
    ]
    corpus = Corpus(pubs, [("OLD", "NEW")], 2013)
    report = validate_corpus(corpus)
    assert report.n_citing_before_cited == 1
    assert len(report.warnings) == 1
    assert corpus.n_linked == 1  # edge retained


def test_validate_clean_and_ratio():
    pubs = [
        Publication("A", 2008, "J", ("X",), "article"),
        Publication("B", 2009, "J", ("X", "Y"), "article"),
    ]
    corpus = Corpus(pubs, [("B", "A")], 2013)
    report = validate_corpus(corpus)
    assert report.warnings == []
    assert report.per_year == {2008: 1, 2009: 1}
    assert report.per_category == {"X": 2, "Y": 1}

    # 10 edges, 1 unlinked -> ratio 0.1
    citers = [Publication(f"C{i}", 2010, "J", ("X",), "article") for i in range(9)]
    edges = [(f"C{i}", "A") for i in range(9)] + [("B", "GONE")]
    corpus = Corpus(pubs + citers, edges, 2013)
    assert validate_corpus(corpus).unlinked_ratio == pytest.approx(0.1)
