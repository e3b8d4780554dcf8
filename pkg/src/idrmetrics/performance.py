"""Performance indicators (rating, citation and impact-factor based) and the
rank-multiplier funding model."""

from __future__ import annotations

import math
import statistics
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import (
    DEFAULT_FUNDING_MULTIPLIERS,
    RANK_LABELS,
    BibRecord,
    CategoryBaseline,
    CitingRecord,
    JournalThesaurus,
    RatingScheme,
    normalize_rank,
)


class PerformanceError(ValueError):
    pass


@dataclass(frozen=True)
class MeanSE:
    """Mean with standard error (sample sd / sqrt(n)) over ``n`` papers.

    ``excluded`` counts papers left out for missing data. ``std_error`` is
    None for measures that are only available in aggregate.
    """

    mean: float
    std_error: float | None
    n: int
    excluded: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class RatingResult(MeanSE):
    percent_rated: float = 0.0


def mean_se(values: Sequence[float], excluded: int = 0) -> MeanSE:
    if not values:
        raise PerformanceError("no values to average")
    n = len(values)
    mean = statistics.mean(values)
    se = statistics.stdev(values) / math.sqrt(n) if n > 1 else 0.0
    return MeanSE(float(mean), float(se), n, excluded)


def mean_rating(papers: Sequence[BibRecord], scheme: RatingScheme) -> RatingResult:
    """Mean rank weight of the rated papers and the share of papers rated."""
    weights = [w for w in (scheme.weight_of(p.journal) for p in papers) if w is not None]
    if not weights:
        raise PerformanceError("no rated publications")
    base = mean_se(weights, excluded=len(papers) - len(weights))
    return RatingResult(base.mean, base.std_error, base.n, base.excluded, len(weights) / len(papers))


def citations_per_paper(papers: Sequence[BibRecord]) -> MeanSE:
    return mean_se([p.times_cited for p in papers])


def journal_normalized(papers: Sequence[BibRecord], baseline: CategoryBaseline) -> MeanSE:
    """Citations divided by the impact factor of the publishing journal."""
    scores = []
    for p in papers:
        jif = baseline.impact_factor(p.journal)
        if jif:
            scores.append(p.times_cited / jif)
    if not scores:
        raise PerformanceError("no paper has a positive journal impact factor")
    return mean_se(scores, excluded=len(papers) - len(scores))


def _category_mean(journal: str, thesaurus: JournalThesaurus, table: Mapping[str, float]) -> float | None:
    vals = [table[c] for c in sorted(thesaurus.categories_of(journal)) if c in table]
    return sum(vals) / len(vals) if vals else None


def field_normalized(papers: Sequence[BibRecord], baseline: CategoryBaseline, thesaurus: JournalThesaurus) -> MeanSE:
    """Citations over the mean citation rate of the journal's categories.

    Journals in several categories use the average of those categories' means.
    """
    scores = []
    for p in papers:
        denom = _category_mean(p.journal, thesaurus, baseline.mean_citations)
        if denom:
            scores.append(p.times_cited / denom)
    if not scores:
        raise PerformanceError("no paper maps to a category with a citation baseline")
    return mean_se(scores, excluded=len(papers) - len(scores))


def citing_side_weights(papers: Sequence[BibRecord], citing: Iterable[CitingRecord], min_refs: int = 11) -> tuple[dict[str, float], int, int]:
    """Fractional citation score per unit paper.

    Returns ``(scores, n_used, n_excluded)``; a citing paper with R >= min_refs
    references adds 1/R to every unit paper it cites.
    """
    scores = {p.record_id: 0.0 for p in papers}
    used = excluded = 0
    for c in citing:
        if c.reference_count < min_refs:
            excluded += 1
            continue
        used += 1
        w = 1.0 / c.reference_count
        for rid in c.cited_unit_papers:
            if rid in scores:
                scores[rid] += w
    return scores, used, excluded


def citing_side_normalized(papers: Sequence[BibRecord], citing: Iterable[CitingRecord], min_refs: int = 11) -> MeanSE:
    """Mean fractional citation score; uncited papers count as 0, no standard error.

    ``citing`` must already exclude the unit's own papers. Citing papers with
    fewer than ``min_refs`` references are ignored.
    """
    if not papers:
        raise PerformanceError("no unit papers")
    scores, _, excluded = citing_side_weights(papers, citing, min_refs)
    return MeanSE(float(statistics.mean(scores.values())), None, len(scores), excluded)


@dataclass(frozen=True)
class ImpactFactorMeans:
    mean_if: MeanSE
    field_normalized_if: MeanSE
    citing_journal_if: MeanSE | None


def impact_factor_means(
    papers: Sequence[BibRecord],
    baseline: CategoryBaseline,
    thesaurus: JournalThesaurus,
    citing: Sequence[CitingRecord] = (),
) -> ImpactFactorMeans:
    ifs = [x for x in (baseline.impact_factor(p.journal) for p in papers) if x is not None]
    if not ifs:
        raise PerformanceError("no publication journal has an impact factor")
    mean_if = mean_se(ifs, excluded=len(papers) - len(ifs))

    normed = []
    for p in papers:
        jif = baseline.impact_factor(p.journal)
        denom = _category_mean(p.journal, thesaurus, baseline.mean_impact_factor)
        if jif is not None and denom:
            normed.append(jif / denom)
    if not normed:
        raise PerformanceError("no paper has a category impact-factor baseline")
    fn_if = mean_se(normed, excluded=len(papers) - len(normed))

    citing_ifs = [x for x in (baseline.impact_factor(c.journal) for c in citing) if x is not None]
    citing_if = mean_se(citing_ifs, excluded=len(citing) - len(citing_ifs)) if citing_ifs else None
    return ImpactFactorMeans(mean_if, fn_if, citing_if)


@dataclass(frozen=True)
class PerformanceReport:
    mean_abs_rank: RatingResult | None
    citations_per_paper: MeanSE
    journal_normalized: MeanSE | None
    field_normalized: MeanSE | None
    citing_side_normalized: MeanSE | None
    mean_if: MeanSE | None
    field_normalized_if: MeanSE | None
    citing_journal_if: MeanSE | None
    observation_span: tuple[int, int]
    errors: dict[str, str] = field(default_factory=dict)

    INDICATORS = (
        "mean_abs_rank",
        "citations_per_paper",
        "journal_normalized",
        "field_normalized",
        "citing_side_normalized",
        "mean_if",
        "field_normalized_if",
        "citing_journal_if",
    )

    @property
    def percent_rated(self) -> float | None:
        return None if self.mean_abs_rank is None else self.mean_abs_rank.percent_rated

    def as_dict(self) -> dict:
        out = {name: (None if getattr(self, name) is None else getattr(self, name).as_dict()) for name in self.INDICATORS}
        out["percent_rated"] = self.percent_rated
        out["observation_span"] = list(self.observation_span)
        out["errors"] = dict(sorted(self.errors.items()))
        return out


def performance_report(
    papers: Sequence[BibRecord],
    citing: Sequence[CitingRecord],
    scheme: RatingScheme | None,
    baseline: CategoryBaseline | None,
    thesaurus: JournalThesaurus | None,
    min_refs: int = 11,
) -> PerformanceReport:
    """All performance indicators for one unit; each failure is recorded, not raised."""
    if not papers:
        raise PerformanceError("no publications")
    errors: dict[str, str] = {}

    def attempt(name, fn):
        try:
            return fn()
        except PerformanceError as exc:
            errors[name] = str(exc)
            return None

    rating = attempt("mean_abs_rank", lambda: mean_rating(papers, scheme)) if scheme else None
    jn = fn = ifm = None
    if baseline is not None:
        jn = attempt("journal_normalized", lambda: journal_normalized(papers, baseline))
        if thesaurus is not None:
            fn = attempt("field_normalized", lambda: field_normalized(papers, baseline, thesaurus))
            ifm = attempt("impact_factor", lambda: impact_factor_means(papers, baseline, thesaurus, citing))
    cs = attempt("citing_side_normalized", lambda: citing_side_normalized(papers, citing, min_refs))
    years = [p.year for p in papers]
    return PerformanceReport(
        mean_abs_rank=rating,
        citations_per_paper=citations_per_paper(papers),
        journal_normalized=jn,
        field_normalized=fn,
        citing_side_normalized=cs,
        mean_if=ifm.mean_if if ifm else None,
        field_normalized_if=ifm.field_normalized_if if ifm else None,
        citing_journal_if=ifm.citing_journal_if if ifm else None,
        observation_span=(min(years), max(years)),
        errors=errors,
    )


# --- funding model -------------------------------------------------------------

@dataclass(frozen=True)
class FundingModel:
    """Rank -> funding multiplier (quasi-exponential by default)."""

    multipliers: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_FUNDING_MULTIPLIERS))

    def __post_init__(self) -> None:
        m = {normalize_rank(k): float(v) for k, v in self.multipliers.items()}
        if any(v < 0 for v in m.values()):
            raise ValueError("funding multipliers must be >= 0")
        object.__setattr__(self, "multipliers", m)

    @classmethod
    def from_scheme(cls, scheme: RatingScheme) -> "FundingModel":
        return cls(dict(scheme.multipliers))

    def score(self, histogram: Mapping[str, float]) -> float:
        total = 0.0
        for rank, count in histogram.items():
            if count < 0:
                raise ValueError(f"negative count for rank {rank!r}")
            rank = normalize_rank(rank)
            if rank not in self.multipliers:
                raise ValueError(f"no multiplier for rank {rank!r}")
            total += count * self.multipliers[rank]
        return total


@dataclass(frozen=True)
class Allocation:
    score: float
    share: float
    per_capita_score: float | None = None


def rating_histogram(papers: Iterable[BibRecord], scheme: RatingScheme) -> dict[str, int]:
    counts = Counter(r for r in (scheme.rank_of(p.journal) for p in papers) if r is not None)
    return {rank: counts.get(rank, 0) for rank in RANK_LABELS}


def allocate_funding(
    histograms: Mapping[str, Mapping[str, float]],
    model: FundingModel | None = None,
    submitted: Mapping[str, float] | None = None,
) -> dict[str, Allocation]:
    """Funding score and share per unit.

    Score is the multiplier-weighted paper count; share is the unit's score over
    all units' scores. ``submitted`` gives per-unit paper counts for the
    per-capita score.
    """
    model = model or FundingModel()
    scores = {unit: model.score(h) for unit, h in histograms.items()}
    total = sum(scores.values())
    if not total > 0:
        raise PerformanceError("all funding scores are zero; shares undefined")
    out = {}
    for unit in sorted(scores):
        pc = None
        if submitted is not None and submitted.get(unit):
            pc = scores[unit] / submitted[unit]
        out[unit] = Allocation(scores[unit], scores[unit] / total, pc)
    return out


def share_ratios(allocations: Mapping[str, Allocation]) -> dict[str, dict[str, float | None]]:
    """``ratios[a][b]`` = share of a / share of b (None when b has no share)."""
    units = sorted(allocations)
    return {
        a: {b: (allocations[a].share / allocations[b].share if allocations[b].share else None) for b in units}
        for a in units
    }
