import pytest

from citnorm import Corpus, Publication, partition_reference_sets


def corpus_with_counts(counts, year=2008, horizon=2013, category="X"):
    """One reference set whose members have the given full-horizon counts.

    Citing publications are non-citable so they stay out of the set.
    """
    pubs = [Publication(f"P{i}", year, "J1", (category,), "article") for i in range(len(counts))]
    edges = []
    k = 0
    for i, c in enumerate(counts):
        for _ in range(c):
            pubs.append(Publication(f"C{k}", year + 1, "JC", (category,), "other"))
            edges.append((f"C{k}", f"P{i}"))
            k += 1
    return Corpus(pubs, edges, horizon_year=horizon)


@pytest.fixture
def five_paper_corpus():
    """The worked single-set example: counts 0, 1, 2, 5, 10."""
    return corpus_with_counts([0, 1, 2, 5, 10])


@pytest.fixture
def five_paper_sets(five_paper_corpus):
    return partition_reference_sets(five_paper_corpus)


def sncs_micro_corpus():
    """Hand-built 10-paper corpus exercising every SNCS ingredient.

    Horizon 2013; focal papers F and G from 2008 (window length 6). F is
    cited once by K (4 windowed linked refs; its journal cohort {K: 4,
    K2: 2} has mean 3 and share 1). G is cited once by M (4 windowed
    linked refs; its cohort {M: 4, M2: 0} has mean 2 and share 0.5).
    """
    pubs = [
        Publication("F", 2008, "JF", ("X",), "article"),
        Publication("G", 2008, "JG", ("X",), "article"),
        Publication("K", 2010, "J1", ("X",), "article"),
        Publication("K2", 2010, "J1", ("X",), "article"),
        Publication("M", 2010, "J2", ("X",), "article"),
        Publication("M2", 2010, "J2", ("X",), "article"),
        Publication("T1", 2007, "JT", ("X",), "article"),
        Publication("T2", 2008, "JT", ("X",), "article"),
        Publication("T3", 2009, "JT", ("X",), "article"),
        Publication("T4", 2009, "JT", ("X",), "article"),
    ]
    edges = [
        ("K", "F"), ("K", "T1"), ("K", "T2"), ("K", "T3"),
        ("K2", "T1"), ("K2", "T2"),
        ("M", "G"), ("M", "T1"), ("M", "T2"), ("M", "T3"),
    ]
    return Corpus(pubs, edges, horizon_year=2013)


@pytest.fixture
def sncs_corpus():
    return sncs_micro_corpus()


def random_corpus(rng, n_pubs=12, n_edges=16, years=(2007, 2013)):
    """Small random corpus; edges avoid self-citations and duplicates."""
    y0, y1 = years
    pubs = [
        Publication(
            f"P{i:03d}",
            int(rng.integers(y0, y1 + 1)),
            f"J{int(rng.integers(0, 4))}",
            (f"cat{int(rng.integers(0, 3))}",),
            "article" if rng.random() < 0.8 else "other",
        )
        for i in range(n_pubs)
    ]
    seen = set()
    edges = []
    for _ in range(n_edges):
        a, b = rng.integers(0, n_pubs, size=2)
        if a == b or (a, b) in seen:
            continue
        seen.add((int(a), int(b)))
        edges.append((pubs[a].pub_id, pubs[b].pub_id))
    return Corpus(pubs, edges, horizon_year=y1)
