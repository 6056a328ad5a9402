"""Thematic trend series over the article corpus.

A topic is an OR-matched term set; a document matches when at least
``min_match`` of the topic terms occur in its title or body tokens.
Counts are bucketed by publication date at month, quarter, year, or
multi-year scale (rolling windows stepped by one year). Shares divide by
the total number of documents published in the same bucket, so that
"more coverage" is distinguishable from "more publishing".
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .errors import EmptyRange, TooFewBuckets
from .reference_engine import CorpusIndex, tokenize

SCALES = ("month", "quarter", "year", "multi_year")
DEFAULT_WINDOW_YEARS = 5
FLAT_SLOPE_FRACTION = 0.05


@dataclass(frozen=True, slots=True)
class TrendBucket:
    bucket_start: date
    count: int
    share: float


@dataclass(frozen=True, slots=True)
class TrendSeries:
    topic_terms: tuple[str, ...]
    scale: str
    window_years: int
    buckets: tuple[TrendBucket, ...]


@dataclass(frozen=True, slots=True)
class TrendSummary:
    direction: str  # rising | falling | flat
    peak_bucket: date
    pct_change_first_to_last: float


def _doc_matches(index: CorpusIndex, doc_id: str, term_tokens: list[tuple[str, ...]],
                 min_match: int) -> bool:
    doc = index.docs[doc_id]
    tokens = frozenset(tokenize(doc.body)) | index.title_terms[doc_id]
    matched = sum(1 for toks in term_tokens if all(t in tokens for t in toks))
    return matched >= min_match


def _month_start(d: date) -> date:
    return date(d.year, d.month, 1)


def _quarter_start(d: date) -> date:
    return date(d.year, 3 * ((d.month - 1) // 3) + 1, 1)


def _iter_simple_buckets(scale: str, start: date, end: date):
    """(bucket_start, bucket_end_exclusive) pairs covering [start, end]."""
    if scale == "year":
        for y in range(start.year, end.year + 1):
            yield date(y, 1, 1), date(y + 1, 1, 1)
        return
    if scale == "quarter":
        cur = _quarter_start(start)
    else:
        cur = _month_start(start)
    step_months = 3 if scale == "quarter" else 1
    while cur <= end:
        m = cur.month + step_months
        nxt = date(cur.year + (m - 1) // 12, (m - 1) % 12 + 1, 1)
        yield cur, nxt
        cur = nxt


def topic_series(index: CorpusIndex, topic_terms: list[str], scale: str,
                 date_range: tuple[date, date], window_years: int = DEFAULT_WINDOW_YEARS,
                 min_match: int = 1) -> TrendSeries:
    """Bucketed counts and shares of topic-matching documents in the range."""
    if not topic_terms:
        raise ValueError("at least one topic term required")
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    start, end = date_range
    if start > end:
        raise EmptyRange(f"{start} > {end}")
    min_match = max(1, min(min_match, len(topic_terms)))

    term_tokens = [tuple(tokenize(term)) or (term.lower(),) for term in topic_terms]
    in_range = [
        d for d in index.docs.values() if start <= d.published <= end
    ]
    matching_dates = sorted(
        d.published for d in in_range
        if _doc_matches(index, d.doc_id, term_tokens, min_match)
    )
    all_dates = sorted(d.published for d in in_range)

    def bucket_counts(lo: date, hi_exclusive: date) -> tuple[int, int]:
        matched = sum(1 for d in matching_dates if lo <= d < hi_exclusive)
        total = sum(1 for d in all_dates if lo <= d < hi_exclusive)
        return matched, total

    buckets: list[TrendBucket] = []
    if scale == "multi_year":
        w = max(1, window_years)
        first, last = start.year, end.year
        starts = list(range(first, last - w + 2)) or [first]
        for y in starts:
            lo, hi = date(y, 1, 1), date(y + w, 1, 1)
            matched, total = bucket_counts(lo, hi)
            buckets.append(TrendBucket(date(y, 1, 1), matched,
                                       matched / total if total else 0.0))
    else:
        for lo, hi in _iter_simple_buckets(scale, start, end):
            matched, total = bucket_counts(lo, hi)
            buckets.append(TrendBucket(lo, matched, matched / total if total else 0.0))

    return TrendSeries(
        topic_terms=tuple(topic_terms),
        scale=scale,
        window_years=window_years if scale == "multi_year" else 0,
        buckets=tuple(buckets),
    )


def summarize_trend(series: TrendSeries) -> TrendSummary:
    """Direction by least-squares slope, peak bucket, and percent change.

    The slope is flat when |slope| < 0.05 * mean(counts); the percent
    change guards against a zero first bucket by dividing by max(first, 1).
    """
    counts = [b.count for b in series.buckets]
    if len(counts) < 2:
        raise TooFewBuckets(f"{len(counts)} buckets")
    x = np.arange(len(counts), dtype=float)
    y = np.asarray(counts, dtype=float)
    slope = float(np.polyfit(x, y, 1)[0])
    mean = float(y.mean())
    if slope == 0.0 or abs(slope) < FLAT_SLOPE_FRACTION * mean:
        direction = "flat"
    elif slope > 0:
        direction = "rising"
    else:
        direction = "falling"
    peak_idx = max(range(len(counts)), key=lambda i: (counts[i], -i))
    pct = (counts[-1] - counts[0]) / max(counts[0], 1) * 100.0
    return TrendSummary(
        direction=direction,
        peak_bucket=series.buckets[peak_idx].bucket_start,
        pct_change_first_to_last=pct,
    )


def series_to_dict(series: TrendSeries) -> dict:
    """JSON-ready form used by the service and CLI."""
    return {
        "topic_terms": list(series.topic_terms),
        "scale": series.scale,
        "window_years": series.window_years,
        "buckets": [
            {
                "bucket_start": b.bucket_start.isoformat(),
                "count": b.count,
                "share": b.share,
            }
            for b in series.buckets
        ],
    }
