"""Reference-set partitioning and combination rules."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citnorm import Corpus, DataError, Publication, build_citation_index, count_citations
from citnorm.refsets import (
    combine_multi_category,
    expected_citation_rate,
    partition_reference_sets,
    reference_set_rows,
)

from conftest import corpus_with_counts, random_corpus


def test_multi_category_paper_joins_one_set_per_category():
    pubs = [
        Publication("A", 2008, "J", ("Oncology", "Immunology"), "article"),
        Publication("B", 2008, "J", ("Oncology",), "article"),
    ]
    corpus = Corpus(pubs, [], 2013)
    sets = partition_reference_sets(corpus)
    assert set(sets) == {("Oncology", 2008), ("Immunology", 2008)}
    assert sets[("Oncology", 2008)].n == 2
    assert sets[("Immunology", 2008)].n == 1
    member_ids = [pid for pid, _ in sets[("Immunology", 2008)].members]
    assert member_ids == ["A"]


def test_single_cell_corpus():
    corpus = corpus_with_counts([0, 0, 1, 2, 3], year=2007)
    sets = partition_reference_sets(corpus)
    # the citing pubs are doc_type "other": not citable, not in any set
    assert set(sets) == {("X", 2007)}
    assert sets[("X", 2007)].n == 5


def test_cross_product_bound():
    rng = np.random.default_rng(0)
    pubs = [
        Publication(
            f"P{i}",
            int(rng.integers(2007, 2011)),
            "J",
            (rng.choice(["A", "B"]),),
            "article",
        )
        for i in range(40)
    ]
    corpus = Corpus(pubs, [], 2013)
    sets = partition_reference_sets(corpus)
    assert len(sets) <= 8  # 2 categories x 4 years


def test_partition_completeness():
    rng = np.random.default_rng(1)
    for _ in range(10):
        corpus = random_corpus(rng, n_pubs=25, n_edges=40)
        sets = partition_reference_sets(corpus)
        total_memberships = sum(s.n for s in sets.values())
        expected = sum(len(p.categories) for p in corpus.citable_publications)
        assert total_memberships == expected


def test_counts_match_index_brute_force():
    rng = np.random.default_rng(2)
    for _ in range(10):
        corpus = random_corpus(rng, n_pubs=20, n_edges=50)
        index = build_citation_index(corpus)
        sets = partition_reference_sets(corpus, index)
        for s in sets.values():
            for pid, count in s.members:
                pub = corpus.publication(pid)
                assert count == count_citations(index, pub, (pub.year, corpus.horizon_year))
            assert expected_citation_rate(s) == pytest.approx(
                np.mean([c for _, c in s.members])
            )


def test_expected_rate_examples():
    corpus = corpus_with_counts([0, 1, 2, 5, 10])
    s = partition_reference_sets(corpus)[("X", 2008)]
    assert expected_citation_rate(s) == pytest.approx(3.6)

    singleton = partition_reference_sets(corpus_with_counts([7]))[("X", 2008)]
    assert expected_citation_rate(singleton) == 7

    zeros = partition_reference_sets(corpus_with_counts([0, 0, 0]))[("X", 2008)]
    assert expected_citation_rate(zeros) == 0


def test_combine_examples():
    assert combine_multi_category([1.2]) == pytest.approx(1.2)
    assert combine_multi_category([50, 70]) == pytest.approx(60)
    assert combine_multi_category([0.8, 1.0, 1.2]) == pytest.approx(1.0)
    with pytest.raises(DataError):
        combine_multi_category([])


@settings(deadline=None, max_examples=50)
@given(st.lists(st.floats(min_value=-1e6, max_value=1e6), min_size=1, max_size=10))
def test_combine_permutation_invariant(scores):
    rng = np.random.default_rng(0)
    shuffled = list(scores)
    rng.shuffle(shuffled)
    assert combine_multi_category(shuffled) == pytest.approx(
        combine_multi_category(scores), abs=1e-9
    )


@settings(deadline=None, max_examples=20)
@given(st.floats(min_value=-100, max_value=100), st.integers(min_value=1, max_value=8))
def test_combine_idempotent_on_constant_lists(value, k):
    assert combine_multi_category([value] * k) == pytest.approx(value)


def test_reference_set_rows_shape():
    corpus = corpus_with_counts([0, 1, 2, 5, 10])
    rows = reference_set_rows(partition_reference_sets(corpus))
    assert rows == [
        {"category": "X", "year": 2008, "n": 5, "mean": 3.6, "min": 0, "max": 10}
    ]
