"""Immutable columnar store for company ranking-list data.

Ingests ranking-list CSV files into a validated, immutable dataset and
exposes the lookup, coverage, and company-name resolution primitives the
query pipeline is built on. Ingestion is strict and all-or-nothing: any
structural error aborts with no observable dataset.

CSV contract (exact header, UTF-8, LF, RFC-4180 quoting, empty = missing)::

    list_id,year,rank,company,founded,sector,industry,country,region,
    revenue_musd,revenue_change_pct,profits_musd,assets_musd,
    market_value_musd,employees,eps

The dataset fingerprint is the SHA-256 of the canonicalized row set: rows
sorted by (list_id, year, rank) and re-serialized in this module's
canonical CSV form. Permuting input rows never changes the fingerprint.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field

from .errors import DuplicateKey, HeaderMismatch, RowError, UnknownList

CSV_COLUMNS = (
    "list_id",
    "year",
    "rank",
    "company",
    "founded",
    "sector",
    "industry",
    "country",
    "region",
    "revenue_musd",
    "revenue_change_pct",
    "profits_musd",
    "assets_musd",
    "market_value_musd",
    "employees",
    "eps",
)

METRICS = (
    "revenue",
    "profits",
    "assets",
    "market_value",
    "employees",
    "revenue_change_pct",
    "eps",
    "rank",
)

METRIC_UNITS = {
    "revenue": "millions_usd",
    "profits": "millions_usd",
    "assets": "millions_usd",
    "market_value": "millions_usd",
    "employees": "people",
    "revenue_change_pct": "percent",
    "eps": "usd_per_share",
    "rank": "rank",
}

METRIC_LABELS = {
    "revenue": "Revenue",
    "profits": "Profits",
    "assets": "Assets",
    "market_value": "Market value",
    "employees": "Employees",
    "revenue_change_pct": "Revenue change",
    "eps": "EPS",
    "rank": "Rank",
}

# CSV column carrying each metric ("rank" doubles as a metric).
METRIC_FIELDS = {
    "revenue": "revenue_musd",
    "profits": "profits_musd",
    "assets": "assets_musd",
    "market_value": "market_value_musd",
    "employees": "employees",
    "revenue_change_pct": "revenue_change_pct",
    "eps": "eps",
    "rank": "rank",
}

KNOWN_LIST_NAMES = {
    "g500": "Global 500",
    "f1000": "Fortune 1000",
    "f500": "Fortune 500",
}

YEAR_MIN, YEAR_MAX = 1900, 2100


@dataclass(frozen=True, slots=True)
class CompanyRecord:
    """One row of a ranking list."""

    list_id: str
    year: int
    rank: int
    company: str
    founded: int | None
    sector: str
    industry: str
    country: str
    region: str
    revenue: float | None
    revenue_change_pct: float | None
    profits: float | None
    assets: float | None
    market_value: float | None
    employees: int | None
    eps: float | None

    def metric(self, name: str) -> float | int | None:
        if name == "rank":
            return self.rank
        return getattr(self, name)


@dataclass(frozen=True, slots=True)
class ListInfo:
    years: tuple[int, ...]  # sorted ascending
    display_name: str


@dataclass(frozen=True, slots=True)
class CompanyInfo:
    canonical: str
    aliases: tuple[str, ...]  # other raw spellings, sorted
    coverage: dict  # list_id -> tuple of years, sorted


@dataclass(frozen=True, slots=True)
class YearCoverage:
    years: tuple[int, ...]  # sorted ascending, non-empty
    cutoff_year: int


@dataclass(frozen=True, slots=True)
class MetricsCatalog:
    """Machine-checkable knowledge boundary derived from the records."""

    lists: dict  # list_id -> ListInfo
    companies: dict  # canonical name -> CompanyInfo
    metrics: tuple[str, ...] = METRICS

    def cutoff_year(self, list_id: str) -> int:
        if list_id not in self.lists:
            raise UnknownList(list_id)
        return self.lists[list_id].years[-1]

    def latest_year(self) -> int:
        return max(info.years[-1] for info in self.lists.values())


@dataclass(frozen=True)
class Dataset:
    """Immutable record store plus derived catalog and fingerprint."""

    records: tuple[CompanyRecord, ...]
    catalog: MetricsCatalog
    load_fingerprint: str
    # derived lookup maps; fully determined by `records`
    _by_key_year: dict = field(repr=False)
    _by_list_year: dict = field(repr=False)


# --- result values (lookups are total functions) ---------------------------


@dataclass(frozen=True, slots=True)
class MetricValue:
    company: str
    metric: str
    year: int
    value: float | int
    unit: str
    list_id: str


@dataclass(frozen=True, slots=True)
class NotFound:
    reason: str  # unknown_company | year_outside_coverage | value_missing
    company: str
    metric: str
    year: int
    latest_available: int | None = None


@dataclass(frozen=True, slots=True)
class ResolvedName:
    canonical: str
    kind: str  # exact | alias | fuzzy


@dataclass(frozen=True, slots=True)
class NoMatch:
    suggestions: tuple[str, ...]  # up to 3 nearest canonical names


# --- name normalization ------------------------------------------------------


def match_normalize(name: str) -> str:
    """Case/whitespace-insensitive comparison form."""
    return " ".join(name.casefold().split())


def key_normalize(name: str) -> str:
    """Grouping key: also drops trailing punctuation per token ("Corp.")."""
    return " ".join(tok.rstrip(".,") for tok in name.casefold().split())


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def normalized_distance(a: str, b: str) -> float:
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


# --- parsing -----------------------------------------------------------------


def _parse_int(raw: str, line: int, col: str, minimum: int | None = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise RowError(line, f"non-integer {col}: {raw!r}") from None
    if minimum is not None and value < minimum:
        raise RowError(line, f"{col} below {minimum}: {value}")
    return value


def _parse_opt_int(raw: str, line: int, col: str) -> int | None:
    if raw == "":
        return None
    return _parse_int(raw, line, col)


def _parse_opt_float(raw: str, line: int, col: str) -> float | None:
    if raw == "":
        return None
    try:
        value = float(raw)
    except ValueError:
        raise RowError(line, f"non-numeric {col}: {raw!r}") from None
    if not math.isfinite(value):
        raise RowError(line, f"non-finite {col}: {raw!r}")
    return value


def _record_from_row(row: list[str], line: int) -> CompanyRecord:
    if len(row) != len(CSV_COLUMNS):
        raise RowError(line, f"expected {len(CSV_COLUMNS)} fields, got {len(row)}")
    (list_id, year_s, rank_s, company, founded_s, sector, industry, country,
     region, revenue_s, change_s, profits_s, assets_s, mv_s, employees_s,
     eps_s) = row
    if not list_id.strip():
        raise RowError(line, "empty list_id")
    company = company.strip()
    if not company:
        raise RowError(line, "empty company")
    year = _parse_int(year_s, line, "year")
    if not YEAR_MIN <= year <= YEAR_MAX:
        raise RowError(line, f"year out of range [{YEAR_MIN}, {YEAR_MAX}]: {year}")
    rank = _parse_int(rank_s, line, "rank", minimum=1)
    founded = _parse_opt_int(founded_s, line, "founded")
    if founded is not None and founded > year:
        raise RowError(line, f"founded {founded} after list year {year}")
    employees = _parse_opt_int(employees_s, line, "employees")
    if employees is not None and employees < 0:
        raise RowError(line, f"negative employees: {employees}")
    return CompanyRecord(
        list_id=list_id.strip(),
        year=year,
        rank=rank,
        company=company,
        founded=founded,
        sector=sector.strip(),
        industry=industry.strip(),
        country=country.strip(),
        region=region.strip(),
        revenue=_parse_opt_float(revenue_s, line, "revenue_musd"),
        revenue_change_pct=_parse_opt_float(change_s, line, "revenue_change_pct"),
        profits=_parse_opt_float(profits_s, line, "profits_musd"),
        assets=_parse_opt_float(assets_s, line, "assets_musd"),
        market_value=_parse_opt_float(mv_s, line, "market_value_musd"),
        employees=employees,
        eps=_parse_opt_float(eps_s, line, "eps"),
    )


def _num_to_csv(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(value)  # shortest round-trip decimal form


def _record_to_row(rec: CompanyRecord) -> list[str]:
    return [
        rec.list_id,
        str(rec.year),
        str(rec.rank),
        rec.company,
        _num_to_csv(rec.founded),
        rec.sector,
        rec.industry,
        rec.country,
        rec.region,
        _num_to_csv(rec.revenue),
        _num_to_csv(rec.revenue_change_pct),
        _num_to_csv(rec.profits),
        _num_to_csv(rec.assets),
        _num_to_csv(rec.market_value),
        _num_to_csv(rec.employees),
        _num_to_csv(rec.eps),
    ]


def _serialize_rows(records: tuple[CompanyRecord, ...]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for rec in records:
        writer.writerow(_record_to_row(rec))
    return buf.getvalue()


def derive_catalog(records: tuple[CompanyRecord, ...]) -> MetricsCatalog:
    """Re-derivable catalog; permutation of records yields an equal catalog."""
    list_years: dict[str, set[int]] = {}
    by_key: dict[str, list[CompanyRecord]] = {}
    for rec in records:
        list_years.setdefault(rec.list_id, set()).add(rec.year)
        by_key.setdefault(key_normalize(rec.company), []).append(rec)

    lists = {
        lid: ListInfo(
            years=tuple(sorted(years)),
            display_name=KNOWN_LIST_NAMES.get(lid, lid),
        )
        for lid, years in sorted(list_years.items())
    }

    companies: dict[str, CompanyInfo] = {}
    for key in sorted(by_key):
        recs = by_key[key]
        # canonical spelling: the one used in the most recent record
        newest = max(recs, key=lambda r: (r.year, r.list_id, -r.rank))
        canonical = newest.company
        aliases = tuple(sorted({r.company for r in recs} - {canonical}))
        coverage: dict[str, tuple[int, ...]] = {}
        for lid in sorted({r.list_id for r in recs}):
            coverage[lid] = tuple(sorted({r.year for r in recs if r.list_id == lid}))
        companies[canonical] = CompanyInfo(canonical, aliases, coverage)
    return MetricsCatalog(lists=lists, companies=companies)


def _build_dataset(records: list[CompanyRecord]) -> Dataset:
    seen_rank: dict[tuple, int] = {}
    seen_company: dict[tuple, int] = {}
    for rec in records:
        rank_key = (rec.list_id, rec.year, rec.rank)
        if rank_key in seen_rank:
            raise DuplicateKey(rank_key)
        seen_rank[rank_key] = 1
        company_key = (rec.list_id, rec.year, key_normalize(rec.company))
        if company_key in seen_company:
            raise DuplicateKey((rec.list_id, rec.year, rec.company))
        seen_company[company_key] = 1

    ordered = tuple(sorted(records, key=lambda r: (r.list_id, r.year, r.rank)))
    catalog = derive_catalog(ordered)
    fingerprint = hashlib.sha256(_serialize_rows(ordered).encode("utf-8")).hexdigest()

    by_key_year: dict[tuple, tuple] = {}
    by_list_year: dict[tuple, tuple] = {}
    tmp_ky: dict[tuple, list] = {}
    tmp_ly: dict[tuple, list] = {}
    for rec in ordered:
        tmp_ky.setdefault((key_normalize(rec.company), rec.year), []).append(rec)
        tmp_ly.setdefault((rec.list_id, rec.year), []).append(rec)
    for k, v in tmp_ky.items():
        by_key_year[k] = tuple(v)
    for k, v in tmp_ly.items():
        by_list_year[k] = tuple(sorted(v, key=lambda r: r.rank))
    return Dataset(
        records=ordered,
        catalog=catalog,
        load_fingerprint=fingerprint,
        _by_key_year=by_key_year,
        _by_list_year=by_list_year,
    )


def ingest_csv(data: bytes | str, source_name: str = "<memory>") -> Dataset:
    """Parse one CSV file into a Dataset; any row error aborts the whole load."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise RowError(0, f"{source_name}: not valid UTF-8: {exc}") from None
    else:
        text = data
    records = _parse_rows(text)
    return _build_dataset(records)


def _parse_rows(text: str) -> list[CompanyRecord]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise HeaderMismatch("empty file") from None
    if header != list(CSV_COLUMNS):
        raise HeaderMismatch(
            f"expected {','.join(CSV_COLUMNS)!r}, got {','.join(header)!r}"
        )
    records = []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue  # ignore trailing blank line
        records.append(_record_from_row(row, line))
    return records


def ingest_files(named_files: list[tuple[str, bytes]]) -> Dataset:
    """Ingest several CSV files (same header) into one Dataset.

    Uniqueness constraints apply across the union; any error aborts all.
    """
    all_records: list[CompanyRecord] = []
    for name, data in named_files:
        text = data.decode("utf-8")
        all_records.extend(_parse_rows(text))
    return _build_dataset(all_records)


def serialize_csv(dataset: Dataset) -> str:
    """Canonical CSV round-trip form (header + rows sorted by list/year/rank)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    buf.write(_serialize_rows(dataset.records))
    return buf.getvalue()


# --- lookups -----------------------------------------------------------------


def _company_years(info: CompanyInfo) -> tuple[int, ...]:
    years: set[int] = set()
    for ys in info.coverage.values():
        years.update(ys)
    return tuple(sorted(years))


def _preferred_record(records: tuple[CompanyRecord, ...], info: CompanyInfo) -> CompanyRecord:
    # company on several lists for the same year: prefer the list where it
    # has the longest coverage, then the lexicographically smaller list_id
    return min(records, key=lambda r: (-len(info.coverage.get(r.list_id, ())), r.list_id))


def lookup_metric(dataset: Dataset, company: str, metric: str, year: int):
    """Exact stored value with unit, or a NotFound variant. Total function."""
    if metric not in METRICS:
        raise KeyError(f"unknown metric {metric!r}")
    catalog = dataset.catalog
    info = catalog.companies.get(company)
    if info is None:
        # tolerate alias spellings of a known company
        key = key_normalize(company)
        for cand in catalog.companies.values():
            if key_normalize(cand.canonical) == key:
                info = cand
                break
        if info is None:
            return NotFound("unknown_company", company, metric, year)
    years = _company_years(info)
    if year not in years:
        return NotFound("year_outside_coverage", info.canonical, metric, year,
                        latest_available=years[-1])
    records = dataset._by_key_year[(key_normalize(info.canonical), year)]
    rec = _preferred_record(records, info)
    value = rec.metric(metric)
    if value is None:
        return NotFound("value_missing", info.canonical, metric, year,
                        latest_available=_latest_with_value(dataset, info, metric))
    return MetricValue(info.canonical, metric, year, value,
                       METRIC_UNITS[metric], rec.list_id)


def _latest_with_value(dataset: Dataset, info: CompanyInfo, metric: str) -> int | None:
    key = key_normalize(info.canonical)
    for year in reversed(_company_years(info)):
        records = dataset._by_key_year[(key, year)]
        if _preferred_record(records, info).metric(metric) is not None:
            return year
    return None


FUZZY_THRESHOLD = 0.2


def resolve_company(catalog: MetricsCatalog, text: str):
    """Ground free text to a canonical company name.

    Exact and alias matches are case-insensitive; fuzzy matching accepts a
    unique best candidate within normalized edit distance 0.2.
    """
    query = match_normalize(text)
    if not query:
        return NoMatch(suggestions=())
    qkey = key_normalize(text)
    for canonical, info in catalog.companies.items():
        if query == match_normalize(canonical):
            return ResolvedName(canonical, "exact")
    for canonical, info in catalog.companies.items():
        if any(query == match_normalize(a) for a in info.aliases):
            return ResolvedName(canonical, "alias")
        if qkey == key_normalize(canonical):
            return ResolvedName(canonical, "alias")

    # fuzzy: best normalized distance per canonical, unique winner required
    scored: list[tuple[float, str]] = []
    for canonical, info in catalog.companies.items():
        forms = (canonical, *info.aliases)
        dist = min(normalized_distance(query, match_normalize(f)) for f in forms)
        scored.append((dist, canonical))
    scored.sort()
    if scored and scored[0][0] <= FUZZY_THRESHOLD:
        if len(scored) == 1 or scored[1][0] > scored[0][0]:
            return ResolvedName(scored[0][1], "fuzzy")
    return NoMatch(suggestions=tuple(name for _, name in scored[:3]))


def coverage(dataset: Dataset, list_id: str) -> YearCoverage:
    """Sorted year coverage for a list; cutoff is the last element."""
    if list_id not in dataset.catalog.lists:
        raise UnknownList(list_id)
    years = dataset.catalog.lists[list_id].years
    return YearCoverage(years=years, cutoff_year=years[-1])
