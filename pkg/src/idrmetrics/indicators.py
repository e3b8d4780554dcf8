"""Interdisciplinarity indicators: diversity, coherence and intermediation."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .corpus import RANK_LABELS, CategoryDistribution, EmptyDistributionError, build_distribution
from .simspace import CrossCitationMatrix, DistanceMatrix, JournalGraph, SimilarityMatrix

NEIGHBORHOODS = ("one", "two")


class IndicatorUndefinedError(ValueError):
    pass


class MissingNodeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiversityReport:
    variety: int
    balance: float
    disparity: float | None
    shannon_entropy: float
    rao_stirling: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CoherenceReport:
    observed_mean_distance: float
    expected_mean_distance: float
    coherence: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class IntermediationReport:
    weighted_clustering: float
    average_similarity: float

    def as_dict(self) -> dict:
        return asdict(self)


def _distances(D: DistanceMatrix, labels: Sequence[str]) -> np.ndarray:
    missing = [x for x in labels if x not in D]
    if missing:
        raise KeyError(f"categories missing from distance matrix: {missing}")
    return D.submatrix(labels)


def _nonzero(dist: CategoryDistribution) -> tuple[list[str], np.ndarray]:
    props = dist.nonzero()
    if not props:
        raise IndicatorUndefinedError("empty distribution")
    labels = list(props)
    return labels, np.array([props[k] for k in labels])


def variety(dist: CategoryDistribution, min_share: float | None = None) -> int:
    """Number of categories holding at least ``min_share`` of the activity."""
    return len(dist.thresholded(min_share))


def shannon_entropy(dist: CategoryDistribution) -> float:
    _, p = _nonzero(dist)
    return float(-np.sum(p * np.log(p)))


def balance(dist: CategoryDistribution) -> float:
    """Shannon evenness over all nonzero categories; 1.0 for a single category."""
    labels, _ = _nonzero(dist)
    if len(labels) == 1:
        return 1.0
    return shannon_entropy(dist) / math.log(len(labels))


def disparity(dist: CategoryDistribution, D: DistanceMatrix, min_share: float | None = None) -> float:
    """Mean distance over ordered pairs of distinct categories above the threshold."""
    labels = list(dist.thresholded(min_share))
    n = len(labels)
    if n < 2:
        raise IndicatorUndefinedError("disparity undefined for single category")
    d = _distances(D, labels)
    return float(d.sum() / (n * (n - 1)))


def rao_stirling(dist: CategoryDistribution, D: DistanceMatrix) -> float:
    """Sum of p_i * p_j * d_ij over ordered pairs (i, j)."""
    labels, p = _nonzero(dist)
    d = _distances(D, labels)
    return float(p @ d @ p)


def coherence(within: CrossCitationMatrix, ref_dist: CategoryDistribution, D: DistanceMatrix) -> CoherenceReport:
    """Observed over expected mean distance of a unit's internal cross-citations.

    The observed term weights distances by the unit's category-to-category
    citation shares; the expected term assumes those shares are the product
    of the reference shares of both categories.
    """
    total = within.total
    if not total > 0:
        raise IndicatorUndefinedError("coherence undefined: no within-set citations")
    w = within.dense()
    active = np.flatnonzero((w.sum(axis=0) + w.sum(axis=1)) > 0)
    labels = [within.labels[i] for i in active]
    observed = float(np.sum(w[np.ix_(active, active)] / total * _distances(D, labels)))
    expected = rao_stirling(ref_dist, D)
    if expected <= 0:
        raise IndicatorUndefinedError("coherence undefined")
    return CoherenceReport(observed, expected, observed / expected)


def clustering_coefficients(G: JournalGraph, neighborhood: str = "two") -> dict[str, float]:
    """Clustering coefficient of every node.

    ``"one"`` is the usual local coefficient over direct neighbours; ``"two"``
    measures link density among all nodes within distance two. Nodes with
    fewer than two direct neighbours score 0.
    """
    if neighborhood not in NEIGHBORHOODS:
        raise ValueError(f"neighborhood must be one of {NEIGHBORHOODS}")
    a = G.adjacency()
    n = len(G.nodes)
    if neighborhood == "two":
        ai = a.astype(np.int64)
        reach = a | ((ai @ ai) > 0)
        np.fill_diagonal(reach, False)
    else:
        reach = a
    degree = a.sum(axis=1)
    out = {}
    for i in range(n):
        if degree[i] < 2:
            out[G.nodes[i]] = 0.0
            continue
        members = np.flatnonzero(reach[i])
        k = len(members)
        links = a[np.ix_(members, members)].sum() / 2
        out[G.nodes[i]] = float(links / (k * (k - 1) / 2))
    return out


def weighted_clustering(journal_dist: CategoryDistribution, G: JournalGraph, neighborhood: str = "two") -> float:
    cc = clustering_coefficients(G, neighborhood)
    props = journal_dist.proportions
    missing = sorted(j for j, p in props.items() if p > 0 and j not in cc)
    if missing:
        warnings.warn(f"journals not in graph, clustering taken as 0: {missing}", MissingNodeWarning, stacklevel=2)
    labels = [j for j in props if j in cc]
    p = np.array([props[j] for j in labels])
    c = np.array([cc[j] for j in labels])
    return float(p @ c) if labels else 0.0


def average_similarity(journal_dist: CategoryDistribution, S: SimilarityMatrix) -> float:
    """Weighted mean over journals of their summed similarity to the other N-1 journals, divided by N."""
    props = journal_dist.nonzero()
    missing = sorted(j for j in props if j not in S)
    if missing:
        raise KeyError(f"journals missing from similarity matrix: {missing}")
    n = len(S)
    labels = list(props)
    idx = [S.index(j) for j in labels]
    inner = (S.values[idx].sum(axis=1) - 1.0) / n
    p = np.array([props[j] for j in labels])
    return float(p @ inner)


def diversity_report(dist: CategoryDistribution, D: DistanceMatrix, min_share: float | None = None) -> DiversityReport:
    try:
        disp = disparity(dist, D, min_share)
    except IndicatorUndefinedError:
        disp = None
    return DiversityReport(
        variety=variety(dist, min_share),
        balance=balance(dist),
        disparity=disp,
        shannon_entropy=shannon_entropy(dist),
        rao_stirling=rao_stirling(dist, D),
    )


def intermediation_report(journal_dist: CategoryDistribution, S: SimilarityMatrix, G: JournalGraph, neighborhood: str = "two") -> IntermediationReport:
    return IntermediationReport(
        weighted_clustering=weighted_clustering(journal_dist, G, neighborhood),
        average_similarity=average_similarity(journal_dist, S),
    )


def rank_diversity(scheme, thesaurus, D: DistanceMatrix, min_share: float = 0.0001) -> dict[str, dict]:
    """Diversity of the subject categories of the journals in each rating rank."""
    out: dict[str, dict] = {}
    for rank in RANK_LABELS:
        journals = scheme.journals_with_rank(rank)
        mapped = [j for j in journals if j in thesaurus]
        try:
            dist = build_distribution(journals, thesaurus, "journals", min_share)
        except EmptyDistributionError:
            out[rank] = {"n_journals": len(journals), "n_mapped": 0}
            continue
        out[rank] = {"n_journals": len(journals), "n_mapped": len(mapped), **diversity_report(dist, D).as_dict()}
    return out

