"""Interdisciplinarity and research-performance indicators for bibliographic corpora."""

from .corpus import (
    BibRecord,
    CategoryBaseline,
    CategoryDistribution,
    CitingRecord,
    CorpusFormatError,
    DocType,
    EmptyDistributionError,
    JournalThesaurus,
    RatingScheme,
    build_distribution,
    build_within_matrix,
    canonical_journal,
    journal_distribution,
    parse_citing_records,
    parse_records,
)
from .indicators import (
    IndicatorUndefinedError,
    balance,
    coherence,
    disparity,
    diversity_report,
    rao_stirling,
    shannon_entropy,
    variety,
    weighted_clustering,
    average_similarity,
)
from .overlay import compose_overlay, export_journal_map, export_pajek, filter_links, parse_pajek
from .performance import FundingModel, allocate_funding, performance_report
from .simspace import (
    CrossCitationMatrix,
    DistanceMatrix,
    JournalGraph,
    SimilarityMatrix,
    build_journal_graph,
    cosine_similarity,
    to_distance,
)

__version__ = "0.1.0"
