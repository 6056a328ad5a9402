from datetime import date

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bizquery.errors import MalformedRange
from bizquery.metrics_store import YearCoverage
from bizquery.temporal import (
    ANCHOR_DOCUMENT,
    BASIS_DEFAULTED,
    BASIS_DOCUMENT,
    BASIS_EXPLICIT,
    KIND_ABSOLUTE_RANGE,
    KIND_ABSOLUTE_YEAR,
    KIND_LAST_N_YEARS,
    KIND_RELATIVE_OFFSET,
    KIND_SINCE_YEAR,
    KIND_UNSPECIFIED,
    TemporalExpr,
    clamp_to_coverage,
    nearest_year,
    parse_temporal,
    resolve,
)

TODAY = date(2025, 6, 15)


def _cov(*years):
    ys = tuple(sorted(years))
    return YearCoverage(years=ys, cutoff_year=ys[-1])


def test_parse_since():
    assert parse_temporal("since 2014", TODAY) == TemporalExpr(KIND_SINCE_YEAR, (2014,))


def test_parse_last_year():
    got = parse_temporal("last year", date(2020, 6, 1))
    assert got == TemporalExpr(KIND_RELATIVE_OFFSET, (-1,))


def test_parse_malformed_range():
    with pytest.raises(MalformedRange):
        parse_temporal("from 2024 to 2020", TODAY)


def test_parse_range_and_words():
    assert parse_temporal("from 2019 to 2022", TODAY) == \
        TemporalExpr(KIND_ABSOLUTE_RANGE, (2019, 2022))
    assert parse_temporal("between 2019 and 2022", TODAY) == \
        TemporalExpr(KIND_ABSOLUTE_RANGE, (2019, 2022))
    assert parse_temporal("over the past five years", TODAY) == \
        TemporalExpr(KIND_LAST_N_YEARS, (5,))
    assert parse_temporal("last decade", TODAY) == \
        TemporalExpr(KIND_LAST_N_YEARS, (10,))
    assert parse_temporal("three years ago", TODAY) == \
        TemporalExpr(KIND_RELATIVE_OFFSET, (-3,))
    assert parse_temporal("in 2021", TODAY) == \
        TemporalExpr(KIND_ABSOLUTE_YEAR, (2021,))
    assert parse_temporal("no time here", TODAY) == \
        TemporalExpr(KIND_UNSPECIFIED)


def test_resolve_document_anchor():
    # a 2020 document saying "last year" means 2019, regardless of today
    expr = parse_temporal("last year", TODAY)
    got = resolve(expr, date(2020, 3, 1), 2024, ANCHOR_DOCUMENT)
    assert got.years == (2019,)
    assert got.basis == BASIS_DOCUMENT


def test_document_anchor_ignores_today():
    expr = TemporalExpr(KIND_RELATIVE_OFFSET, (-1,))
    for today in (date(2023, 1, 1), date(2025, 12, 31), date(2030, 7, 4)):
        reparsed = parse_temporal("last year", today)
        assert reparsed == expr
        got = resolve(reparsed, date(2020, 3, 1), 2024, ANCHOR_DOCUMENT)
        assert got.years == (2019,)


def test_resolve_unspecified_defaults_to_latest():
    got = resolve(TemporalExpr(KIND_UNSPECIFIED), TODAY, 2024)
    assert got.years == (2024,)
    assert got.basis == BASIS_DEFAULTED


def test_resolve_since_expansion():
    got = resolve(TemporalExpr(KIND_SINCE_YEAR, (2014,)), TODAY, 2024)
    assert got.years == tuple(range(2014, 2025))
    assert got.basis == BASIS_EXPLICIT


def test_resolve_last_n():
    got = resolve(TemporalExpr(KIND_LAST_N_YEARS, (3,)), TODAY, 2024)
    assert got.years == (2022, 2023, 2024)


def test_resolve_since_future_year():
    got = resolve(TemporalExpr(KIND_SINCE_YEAR, (2030,)), TODAY, 2024)
    assert got.years == (2030,)  # non-empty; the clamp will reject it


def test_clamp_metric_reject():
    out = clamp_to_coverage(resolve(TemporalExpr(KIND_ABSOLUTE_YEAR, (2025,)), TODAY, 2024),
                            _cov(*range(2015, 2025)), "metric")
    assert out.kind == "reject"
    assert out.effective_years == ()
    assert out.latest_available == 2024


def test_clamp_ranking_redirect_nearest_recent():
    out = clamp_to_coverage(resolve(TemporalExpr(KIND_ABSOLUTE_YEAR, (2018,)), TODAY, 2020),
                            _cov(2015, 2020), "ranking")
    assert out.kind == "redirect"
    assert out.nearest_available == 2020  # distance 2 beats distance 3
    assert out.effective_years == (2020,)


def test_clamp_multi_year_intersection():
    resolved = resolve(TemporalExpr(KIND_ABSOLUTE_RANGE, (2014, 2024)), TODAY, 2024)
    out = clamp_to_coverage(resolved, _cov(*range(2015, 2025)), "metric")
    assert out.kind == "in_range"
    assert out.effective_years == tuple(range(2015, 2025))


def test_clamp_multi_year_empty_intersection_rejects():
    resolved = resolve(TemporalExpr(KIND_ABSOLUTE_RANGE, (2001, 2003)), TODAY, 2024)
    out = clamp_to_coverage(resolved, _cov(*range(2015, 2025)), "ranking")
    assert out.kind == "reject"
    assert out.latest_available == 2024


def test_equidistant_tie_prefers_recent():
    assert nearest_year(2018, (2016, 2020)) == 2020


def test_resolution_deterministic():
    expr = TemporalExpr(KIND_LAST_N_YEARS, (4,))
    a = resolve(expr, TODAY, 2024)
    b = resolve(expr, TODAY, 2024)
    assert a == b


@settings(max_examples=200, deadline=None)
@given(
    requested=st.integers(min_value=1900, max_value=2100),
    years=st.sets(st.integers(min_value=1990, max_value=2040), min_size=1, max_size=15),
)
def test_redirect_minimizes_distance(requested, years):
    cov = _cov(*years)
    out = clamp_to_coverage(
        resolve(TemporalExpr(KIND_ABSOLUTE_YEAR, (requested,)), TODAY, cov.cutoff_year),
        cov, "ranking")
    if out.kind == "in_range":
        assert requested in years
        return
    assert out.kind == "redirect"
    # linear scan oracle
    best = None
    for y in sorted(years):
        if best is None or abs(y - requested) < abs(best - requested) or \
                (abs(y - requested) == abs(best - requested) and y > best):
            best = y
    assert out.nearest_available == best
    assert set(out.effective_years) <= years


@settings(max_examples=200, deadline=None)
@given(
    req=st.sets(st.integers(min_value=2000, max_value=2035), min_size=1, max_size=8),
    years=st.sets(st.integers(min_value=2000, max_value=2035), min_size=1, max_size=12),
    policy=st.sampled_from(["metric", "ranking"]),
)
def test_clamp_never_exceeds_coverage(req, years, policy):
    from bizquery.temporal import ResolvedTime

    cov = _cov(*years)
    out = clamp_to_coverage(ResolvedTime(tuple(sorted(req)), BASIS_EXPLICIT),
                            cov, policy)
    assert set(out.effective_years) <= years
    if out.kind == "reject":
        assert out.effective_years == ()
        assert out.latest_available == cov.cutoff_year
