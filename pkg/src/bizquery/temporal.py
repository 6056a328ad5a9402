"""Temporal expression parsing, resolution, and coverage clamping.

A query's time phrase ("since 2014", "last year", "over the past decade")
is first parsed into a TemporalExpr, then resolved into concrete years
against an anchor date, and finally clamped against dataset coverage to
produce the knowledge-boundary outcome (in range, redirect, or reject).

Relative phrases resolve against the anchor's calendar year; when the
anchor is a document's publication date, the result is document-anchored
and never consults today's date.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date

from .errors import MalformedRange
from .metrics_store import YearCoverage

KIND_ABSOLUTE_YEAR = "absolute_year"
KIND_ABSOLUTE_RANGE = "absolute_range"
KIND_RELATIVE_OFFSET = "relative_year_offset"
KIND_SINCE_YEAR = "since_year"
KIND_LAST_N_YEARS = "last_n_years"
KIND_UNSPECIFIED = "unspecified"

BASIS_EXPLICIT = "explicit"
BASIS_DEFAULTED = "defaulted_to_latest"
BASIS_DOCUMENT = "document_anchored"

ANCHOR_QUERY = "query"
ANCHOR_DOCUMENT = "document"


@dataclass(frozen=True, slots=True)
class TemporalExpr:
    kind: str
    values: tuple[int, ...] = ()


@dataclass(frozen=True, slots=True)
class ResolvedTime:
    years: tuple[int, ...]  # non-empty, sorted ascending
    basis: str


@dataclass(frozen=True, slots=True)
class BoundaryOutcome:
    kind: str  # in_range | redirect | reject
    effective_years: tuple[int, ...]  # empty iff reject
    nearest_available: int | None
    latest_available: int


_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "eleven": 11, "twelve": 12, "fifteen": 15, "twenty": 20,
}

_YEAR = r"(19\d{2}|20\d{2}|2100)"
_NUM = r"(\d+|" + "|".join(_NUMBER_WORDS) + r")"

_RANGE_RES = [
    re.compile(r"\bfrom\s+" + _YEAR + r"\s+(?:to|until|through)\s+" + _YEAR, re.I),
    re.compile(r"\bbetween\s+" + _YEAR + r"\s+and\s+" + _YEAR, re.I),
    re.compile(r"\b" + _YEAR + r"\s*(?:-|–|to)\s*" + _YEAR + r"\b", re.I),
]
_SINCE_RE = re.compile(r"\bsince\s+" + _YEAR, re.I)
_DECADE_RE = re.compile(r"\b(?:last|past|previous)\s+decade\b", re.I)
_LAST_N_RE = re.compile(r"\b(?:last|past|previous)\s+" + _NUM + r"\s+years\b", re.I)
_AGO_RE = re.compile(r"\b" + _NUM + r"\s+years?\s+ago\b", re.I)
_A_YEAR_AGO_RE = re.compile(r"\ba\s+year\s+ago\b", re.I)
_LAST_YEAR_RE = re.compile(r"\b(?:last|previous)\s+year\b", re.I)
_THIS_YEAR_RE = re.compile(r"\bthis\s+year\b", re.I)
_YEAR_RE = re.compile(r"\b" + _YEAR + r"\b")


def _num(token: str) -> int:
    token = token.lower()
    return _NUMBER_WORDS.get(token) or int(token)


def extract_years(text: str) -> tuple[int, ...]:
    """All standalone 4-digit years in order of appearance (with repeats dropped)."""
    seen: list[int] = []
    for m in _YEAR_RE.finditer(text):
        y = int(m.group(1))
        if y not in seen:
            seen.append(y)
    return tuple(seen)


def parse_temporal(text: str, today: date) -> TemporalExpr:
    """Parse the time phrase of a query. `today` is accepted for signature
    symmetry with resolve(); recognition itself is date-independent."""
    for rx in _RANGE_RES:
        m = rx.search(text)
        if m:
            start, end = int(m.group(1)), int(m.group(2))
            if start > end:
                raise MalformedRange(f"{start} > {end}")
            return TemporalExpr(KIND_ABSOLUTE_RANGE, (start, end))
    m = _SINCE_RE.search(text)
    if m:
        return TemporalExpr(KIND_SINCE_YEAR, (int(m.group(1)),))
    if _DECADE_RE.search(text):
        return TemporalExpr(KIND_LAST_N_YEARS, (10,))
    m = _LAST_N_RE.search(text)
    if m:
        n = _num(m.group(1))
        if n < 1:
            raise MalformedRange(f"last {n} years")
        return TemporalExpr(KIND_LAST_N_YEARS, (n,))
    m = _AGO_RE.search(text)
    if m:
        return TemporalExpr(KIND_RELATIVE_OFFSET, (-_num(m.group(1)),))
    if _A_YEAR_AGO_RE.search(text):
        return TemporalExpr(KIND_RELATIVE_OFFSET, (-1,))
    if _LAST_YEAR_RE.search(text):
        return TemporalExpr(KIND_RELATIVE_OFFSET, (-1,))
    if _THIS_YEAR_RE.search(text):
        return TemporalExpr(KIND_RELATIVE_OFFSET, (0,))
    years = extract_years(text)
    if years:
        return TemporalExpr(KIND_ABSOLUTE_YEAR, (years[0],))
    return TemporalExpr(KIND_UNSPECIFIED)


def resolve(expr: TemporalExpr, anchor: date, latest_year: int,
            anchor_kind: str = ANCHOR_QUERY) -> ResolvedTime:
    """Resolve an expression to concrete years.

    Relative kinds use the anchor's year; document anchors yield a
    document_anchored basis. Unspecified time defaults to the latest year.
    """
    kind = expr.kind
    if kind == KIND_ABSOLUTE_YEAR:
        return ResolvedTime((expr.values[0],), BASIS_EXPLICIT)
    if kind == KIND_ABSOLUTE_RANGE:
        start, end = expr.values
        return ResolvedTime(tuple(range(start, end + 1)), BASIS_EXPLICIT)
    if kind == KIND_SINCE_YEAR:
        start = expr.values[0]
        end = max(start, latest_year)
        return ResolvedTime(tuple(range(start, end + 1)), BASIS_EXPLICIT)
    if kind == KIND_LAST_N_YEARS:
        n = expr.values[0]
        return ResolvedTime(tuple(range(latest_year - n + 1, latest_year + 1)),
                            BASIS_EXPLICIT)
    if kind == KIND_RELATIVE_OFFSET:
        year = anchor.year + expr.values[0]
        basis = BASIS_DOCUMENT if anchor_kind == ANCHOR_DOCUMENT else BASIS_EXPLICIT
        return ResolvedTime((year,), basis)
    if kind == KIND_UNSPECIFIED:
        return ResolvedTime((latest_year,), BASIS_DEFAULTED)
    raise ValueError(f"unknown temporal kind {kind!r}")


POLICY_METRIC = "metric"
POLICY_RANKING = "ranking"


def nearest_year(requested: int, available: tuple[int, ...]) -> int:
    """Closest available year; equidistant ties go to the more recent year."""
    return min(available, key=lambda y: (abs(y - requested), -y))


def clamp_to_coverage(resolved: ResolvedTime, cov: YearCoverage,
                      policy: str) -> BoundaryOutcome:
    """Knowledge-boundary decision for the requested years.

    Single off-coverage years redirect (ranking) or reject (metric);
    multi-year requests are intersected with coverage and reject only
    when the intersection is empty.
    """
    available = set(cov.years)
    requested = resolved.years
    latest = cov.cutoff_year
    inside = tuple(y for y in requested if y in available)
    if len(inside) == len(requested):
        return BoundaryOutcome("in_range", requested, None, latest)
    if len(requested) == 1:
        if policy == POLICY_RANKING:
            target = nearest_year(requested[0], cov.years)
            return BoundaryOutcome("redirect", (target,), target, latest)
        return BoundaryOutcome("reject", (), None, latest)
    if inside:
        return BoundaryOutcome("in_range", inside, None, latest)
    return BoundaryOutcome("reject", (), None, latest)
