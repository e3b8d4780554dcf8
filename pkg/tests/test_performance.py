from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idrmetrics.corpus import BibRecord, CategoryBaseline, CitingRecord, DocType, JournalThesaurus, RatingScheme
from idrmetrics.performance import (
    FundingModel,
    PerformanceError,
    allocate_funding,
    citations_per_paper,
    citing_side_normalized,
    citing_side_weights,
    field_normalized,
    impact_factor_means,
    journal_normalized,
    mean_rating,
    performance_report,
    rating_histogram,
    share_ratios,
)

import oracle

JOURNALS = ["J1", "J2", "J3", "J4", "J5", "J6"]
SCHEME = RatingScheme({"J1": "1", "J2": "2", "J3": "3", "J4": "4", "J5": "4*"})


def paper(journal, tc=0, rid=None, year=2008):
    return BibRecord(rid or f"{journal}-{tc}", journal, year, DocType.ARTICLE, tc)


def papers_from(journals, tcs=None):
    tcs = tcs or [0] * len(journals)
    return [paper(j, t, rid=f"p{i}") for i, (j, t) in enumerate(zip(journals, tcs))]


def test_mean_rating_examples():
    r = mean_rating(papers_from(["J2", "J5"]), SCHEME)
    assert r.mean == 3.5
    r = mean_rating(papers_from(["J2"] * 4 + ["J6"] * 6), SCHEME)
    assert r.percent_rated == pytest.approx(0.4)
    assert (r.n, r.excluded) == (4, 6)
    r = mean_rating(papers_from(["J3", "J3", "J4", "J2", "J5"]), SCHEME)
    assert r.mean == pytest.approx(3.4, rel=1e-15)
    assert r.std_error == pytest.approx(oracle.mean_se([3, 3, 4, 2, 5])[1], rel=1e-12)
    assert round(r.std_error, 6) == 0.509902
    with pytest.raises(PerformanceError, match="no rated publications"):
        mean_rating(papers_from(["J6"]), SCHEME)


def test_citations_per_paper_examples():
    m = citations_per_paper(papers_from(["J1"] * 3, [0, 0, 0]))
    assert (m.mean, m.std_error) == (0, 0)
    m = citations_per_paper(papers_from(["J1"], [10]))
    assert (m.mean, m.std_error) == (10, 0)
    m = citations_per_paper(papers_from(["J1"] * 3, [2, 4, 12]))
    assert m.mean == 6
    assert round(m.std_error, 3) == 3.055


BASE = CategoryBaseline(
    mean_citations={"A": 4.0, "B": 2.0, "C": 6.0},
    impact_factors={"J1": 3.0, "J2": 0.0, "J3": 2.5, "J4": 1.5},
    mean_impact_factor={"A": 1.5, "B": 2.0, "C": 3.0},
)
THES = JournalThesaurus({"J1": {"A"}, "J2": {"B", "C"}, "J3": {"A", "C"}, "J4": {"C"}})


def test_journal_normalized_examples():
    assert journal_normalized(papers_from(["J1"], [6]), BASE).mean == 2.0
    m = journal_normalized(papers_from(["J1", "J5"], [6, 9]), BASE)
    assert (m.n, m.excluded) == (1, 1)
    m = journal_normalized(papers_from(["J1", "J2", "J3", "J4"], [6, 3, 5, 4]), BASE)
    (mean, se), excl = oracle.journal_normalized([("J1", 6), ("J2", 3), ("J3", 5), ("J4", 4)], {"J1": 3.0, "J2": 0.0, "J3": 2.5, "J4": 1.5})
    assert (m.mean, m.std_error, m.excluded) == (pytest.approx(mean, rel=1e-12), pytest.approx(se, rel=1e-12), excl)
    with pytest.raises(PerformanceError):
        journal_normalized(papers_from(["J2", "J6"]), BASE)


def test_field_normalized_examples():
    assert field_normalized(papers_from(["J1"], [8]), BASE, THES).mean == 2.0
    # categories B and C average 2 and 6 -> denominator 4
    assert field_normalized(papers_from(["J2"], [8]), BASE, THES).mean == 2.0
    data = [("J1", 8), ("J2", 3), ("J3", 0), ("J4", 12), ("J6", 5)]
    m = field_normalized(papers_from(*zip(*data)), BASE, THES)
    (mean, se), excl = oracle.field_normalized(data, {k: sorted(v) for k, v in THES.mapping.items()}, BASE.mean_citations)
    assert m.mean == pytest.approx(mean, rel=1e-12)
    assert m.std_error == pytest.approx(se, rel=1e-12)
    assert m.excluded == excl == 1


def citer(rid, nref, cited, unit=None, journal="J1"):
    return CitingRecord(rid, journal, nref, frozenset(cited), unit)


def test_citing_side_examples():
    ps = papers_from(["J1"])
    assert citing_side_normalized(ps, [citer("c", 20, ["p0"])]).mean == pytest.approx(0.05)
    assert citing_side_normalized(ps, [citer("c", 10, ["p0"])]).mean == 0.0
    assert citing_side_normalized(ps, [citer("c", 11, ["p0"])]).mean == pytest.approx(1 / 11)
    ps = papers_from(["J1"] * 3)
    cs = [citer("a", 12, ["p0", "p1"]), citer("b", 40, ["p0"]), citer("c", 10, ["p2"]),
          citer("d", 25, ["p1", "p2", "zz"]), citer("e", 11, ["p2"])]
    ref = oracle.citing_side(["p0", "p1", "p2"], [(c.reference_count, c.cited_unit_papers) for c in cs])
    m = citing_side_normalized(ps, cs)
    assert m.mean == pytest.approx(ref, rel=1e-12)
    assert m.std_error is None and m.excluded == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 200), st.sets(st.sampled_from([f"p{i}" for i in range(6)]), min_size=1))
def test_citing_record_total_weight(nref, cited):
    ps = papers_from(["J1"] * 6)
    scores, used, _ = citing_side_weights(ps, [citer("c", nref, cited)])
    expected = len(cited) / nref if nref >= 11 else 0.0
    assert sum(scores.values()) == pytest.approx(expected, rel=1e-12)


def test_impact_factor_examples():
    r = impact_factor_means(papers_from(["J3"] * 4), BASE, THES)
    assert (r.mean_if.mean, r.mean_if.std_error) == (2.5, 0.0)
    one = CategoryBaseline({"A": 1.0}, {"J1": 3.0}, {"A": 1.5})
    assert impact_factor_means(papers_from(["J1"]), one, THES).field_normalized_if.mean == 2.0
    data = [("J1", 0), ("J2", 0), ("J3", 0), ("J4", 0), ("J6", 0)]
    r = impact_factor_means(papers_from(*zip(*data)), BASE, THES, [citer("c", 20, ["p0"], journal="J3"), citer("d", 20, ["p0"], journal="J9")])
    m, fn, cit = oracle.if_means(data, {k: sorted(v) for k, v in THES.mapping.items()}, BASE.impact_factors, BASE.mean_impact_factor, ["J3", "J9"])
    assert (r.mean_if.mean, r.mean_if.std_error) == (pytest.approx(m[0], rel=1e-12), pytest.approx(m[1], rel=1e-12))
    assert r.mean_if.excluded == 1
    assert r.field_normalized_if.mean == pytest.approx(fn[0], rel=1e-12)
    assert r.field_normalized_if.std_error == pytest.approx(fn[1], rel=1e-12)
    assert (r.citing_journal_if.mean, r.citing_journal_if.excluded) == (cit[0], 1)


def test_performance_report_collects_errors():
    rep = performance_report(papers_from(["J6", "J6"], [1, 3]), [], SCHEME, BASE, THES)
    assert rep.citations_per_paper.mean == 2
    assert set(rep.errors) >= {"mean_abs_rank", "journal_normalized", "field_normalized"}
    assert rep.citing_side_normalized.mean == 0.0
    d = rep.as_dict()
    assert d["observation_span"] == [2008, 2008]


def test_funding_examples():
    model = FundingModel()
    alloc = allocate_funding({"A": {"4": 1}, "B": {"2": 1}}, model)
    assert (alloc["A"].score, alloc["B"].score) == (9, 1)
    assert (alloc["A"].share, alloc["B"].share) == (pytest.approx(0.9), pytest.approx(0.1))
    assert model.score({"1": 7}) == 0
    alloc = allocate_funding({"A": {"3": 2, "2": 1}, "B": {"3": 2, "2": 1}})
    assert alloc["A"].share == alloc["B"].share == 0.5
    with pytest.raises(PerformanceError):
        allocate_funding({"A": {"1": 3}, "B": {}})
    assert allocate_funding({"A": {"2": 4}}, submitted={"A": 8})["A"].per_capita_score == 0.5
    assert allocate_funding({"A": {"2": 1}})["A"].share == 1.0


def test_paper_multipliers_for_ranks_one_to_four():
    m = FundingModel().multipliers
    assert [m[r] for r in ("1", "2", "3", "4")] == [0, 1, 3, 9]
    with pytest.raises(ValueError):
        FundingModel({"1": -1})


hist = st.fixed_dictionaries({r: st.integers(0, 30) for r in ("1", "2", "3", "4", "4*")})


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from("ABCDE"), hist, min_size=1, max_size=5))
def test_shares_sum_to_one_and_match_oracle(hists):
    model = FundingModel()
    try:
        alloc = allocate_funding(hists, model)
    except PerformanceError:
        assert all(model.score(h) == 0 for h in hists.values())
        return
    assert math.fsum(a.share for a in alloc.values()) == pytest.approx(1.0, abs=1e-12)
    ref = oracle.funding(hists, model.multipliers)
    for u, a in alloc.items():
        assert a.score == pytest.approx(ref[u][0], rel=1e-12)
        assert a.share == pytest.approx(ref[u][1], rel=1e-12)


RANKS = ("1", "2", "3", "4", "4*")


@settings(max_examples=100, deadline=None)
@given(hist, hist, st.integers(0, 3))
def test_upgrading_a_paper_never_lowers_share(h, other, k):
    lo, hi = RANKS[k], RANKS[k + 1]
    if h[lo] == 0:
        return
    up = dict(h)
    up[lo] -= 1
    up[hi] += 1
    try:
        before = allocate_funding({"A": h, "B": other})["A"].share
    except PerformanceError:
        return
    after = allocate_funding({"A": up, "B": other})["A"].share
    assert after >= before - 1e-15


def test_rating_histogram_and_ratios():
    ps = papers_from(["J1", "J4", "J4", "J5", "J6"])
    assert rating_histogram(ps, SCHEME) == {"1": 1, "2": 0, "3": 0, "4": 2, "4*": 1}
    ratios = share_ratios(allocate_funding({"A": {"4": 1}, "B": {"2": 1}}))
    assert ratios["A"]["B"] == pytest.approx(9.0)
    assert ratios["B"]["A"] == pytest.approx(1 / 9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(JOURNALS), min_size=1, max_size=30), st.randoms(use_true_random=False))
def test_mean_rating_permutation_invariant(journals, rnd):
    ps = papers_from(journals)
    shuffled = list(ps)
    rnd.shuffle(shuffled)
    try:
        a = mean_rating(ps, SCHEME)
    except PerformanceError:
        return
    b = mean_rating(shuffled, SCHEME)
    assert b.mean == pytest.approx(a.mean, rel=1e-15) and b.std_error == pytest.approx(a.std_error, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["J1", "J2", "J3", "J4"]), st.integers(0, 50)), min_size=1, max_size=20), st.integers(1, 50))
def test_field_normalized_scale_invariant(data, k):
    base2 = CategoryBaseline({c: v * k for c, v in BASE.mean_citations.items()}, BASE.impact_factors)
    a = field_normalized(papers_from(*zip(*data)), BASE, THES)
    b = field_normalized(papers_from([j for j, _ in data], [t * k for _, t in data]), base2, THES)
    assert b.mean == pytest.approx(a.mean, rel=1e-12, abs=1e-15)
