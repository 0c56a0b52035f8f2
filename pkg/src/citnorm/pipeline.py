"""Orchestration: corpus in, complete indicator table out."""

from __future__ import annotations

from .citing import SNCS_COLUMNS, score_all_citing_side
from .cited import CITED_SIDE_COLUMNS, score_all_cited_side
from .corpus import Corpus, build_citation_index
from .errors import DataError
from .refsets import partition_reference_sets
from .table import INDICATOR_COLUMNS, IndicatorTable


def compute_indicators(
    corpus: Corpus,
    indicators: tuple[str, ...] | None = None,
    sncs_window: int | None = None,
) -> IndicatorTable:
    """Score every citable publication on the selected indicators.

    ``indicators`` defaults to all nine columns; z-mirror columns are
    attached for whatever was computed.
    """
    selected = tuple(indicators) if indicators is not None else INDICATOR_COLUMNS
    unknown = [c for c in selected if c not in INDICATOR_COLUMNS]
    if unknown:
        raise DataError(f"unknown indicator(s): {', '.join(unknown)}")

    index = build_citation_index(corpus)
    cited_wanted = tuple(c for c in selected if c in CITED_SIDE_COLUMNS)
    needs_sets = any(c != "citations_3y" for c in cited_wanted)
    sets = partition_reference_sets(corpus, index) if needs_sets else {}
    table = score_all_cited_side(corpus, sets, index, columns=cited_wanted or ())

    sncs_wanted = tuple(c for c in selected if c in SNCS_COLUMNS)
    if sncs_wanted:
        cols, tally = score_all_citing_side(corpus, columns=sncs_wanted, fixed_window=sncs_window)
        for name, values in cols.items():
            table.columns[name] = values
        table.metadata["sncs_anomalies"] = tally
        if sncs_window is not None:
            table.metadata["sncs_fixed_window"] = sncs_window

    table.metadata["indicators"] = list(table.indicator_names())
    table.add_z_columns()
    return table
