"""citnorm: normalized citation impact indicators and a validation harness.

Cited-side indicators (MNCS, inverted InCites percentile, Hazen percentile,
P100, P100') compare a publication's citations against its subject-category
and publication-year reference set; citing-side indicators (SNCS1-3) weight
each incoming citation by the citing side's linked-reference behaviour. The
evaluation pipeline correlates all of them against expert recommendations
with Spearman CIs, cluster-bootstrap dummy regressions, and predictive
margins.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .corpus import (
    CitationIndex,
    Corpus,
    CorpusConfig,
    Publication,
    ReferenceEdge,
    build_citation_index,
    count_citations,
    load_corpus,
    validate_corpus,
)
from .errors import DataError
from .evaluation import (
    EvaluationReport,
    RecommendationRecord,
    dedup_first_recommendation,
    evaluate,
    spearman,
    spearman_ci,
    z_transform,
)
from .pipeline import compute_indicators
from .refsets import ReferenceSet, partition_reference_sets
from .synth import GeneratorSpec, generate_corpus, generate_recommendations
from .table import IndicatorTable

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "CitationIndex",
    "Corpus",
    "CorpusConfig",
    "DataError",
    "EvaluationReport",
    "GeneratorSpec",
    "IndicatorTable",
    "Publication",
    "RecommendationRecord",
    "ReferenceEdge",
    "ReferenceSet",
    "build_citation_index",
    "compute_indicators",
    "count_citations",
    "dedup_first_recommendation",
    "evaluate",
    "generate_corpus",
    "generate_recommendations",
    "load_corpus",
    "partition_reference_sets",
    "spearman",
    "spearman_ci",
    "validate_corpus",
    "z_transform",
    "__version__",
]
