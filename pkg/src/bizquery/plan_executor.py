"""Plan execution over the immutable dataset, inside a resource budget.

A QueryPlan is a closed intermediate representation; executing it can
never run arbitrary code, so sandboxing reduces to hard budgets on rows
scanned, output size, and wall-clock time. Exceeding any budget aborts
with ExecError("budget") and no partial table ever escapes.

Execution contract (the oracle in ``oracle.py`` reimplements this
independently; keep the two in sync through this text, not shared code):

* Selection: records matching ``list_id``, ``year in effective_years``,
  and, when companies are given, the company (name-normalized). With
  ``top_k``, within each year rank candidates with a non-missing primary
  metric by value (descending, except ``rank`` which is ascending), ties
  by stored rank then company, and keep the first k.
* Grouping: ``(dim, agg)`` aggregates the metric per (year, dim value);
  sum/avg/min/max skip missing values (math.fsum for sum/avg), count
  counts all selected records; a group with no usable values keeps an
  explicit missing cell.
* Row order: metric tables (company asc, year asc); grouped tables
  (year asc, group value asc); ranking tables (year asc, position asc);
  bar charts by value descending then stored rank then company, missing
  rows last by (company, year); line charts (company asc, year asc);
  scatter by stored rank ascending.
* Chart rows drop records whose plotted value is missing (both axes must
  be present for scatter); the ResultTable keeps them as explicit None.
  A chart with zero plottable rows is ExecError("empty").

ChartSpec serialization is canonical JSON: fixed key order (version,
chart_type, title, x, y, series_field, rows; row keys x, y, then series
or extra labels), UTF-8, no extra whitespace, floats in shortest
round-trip form. Equal inputs serialize to identical bytes.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

from .errors import ExecError, InvalidPlan
from .metrics_store import (
    METRIC_FIELDS,
    METRIC_LABELS,
    METRIC_UNITS,
    Dataset,
    key_normalize,
)
from .query_frontend import QueryPlan, canonical_form

UNIT_LABELS = {
    "millions_usd": "millions USD",
    "percent": "%",
    "usd_per_share": "USD per share",
    "people": "people",
    "rank": "rank",
}


@dataclass(frozen=True, slots=True)
class Column:
    name: str
    kind: str  # categorical | temporal | quantitative
    unit: str | None = None


@dataclass(frozen=True, slots=True)
class ResultTable:
    columns: tuple[Column, ...]
    rows: tuple[tuple, ...]
    provenance: dict  # {"plan": canonical form, "dataset_fingerprint": ...}


@dataclass(frozen=True, slots=True)
class ChartSpec:
    version: int
    chart_type: str
    title: str
    x: dict  # {field, label, kind}
    y: dict  # {field, label, kind, unit}
    series_field: str | None
    rows: tuple[dict, ...]


@dataclass(frozen=True, slots=True)
class SandboxLimits:
    max_rows_scanned: int = 1_000_000
    max_output_rows: int = 10_000
    wall_clock_budget_ms: int = 2_000

    def __post_init__(self):
        if min(self.max_rows_scanned, self.max_output_rows,
               self.wall_clock_budget_ms) <= 0:
            raise InvalidPlan("sandbox limits must be positive")


@dataclass(frozen=True, slots=True)
class ExecutionResult:
    table: ResultTable
    chart_spec: ChartSpec | None = None
    chart_spec_json: str | None = None


class _Budget:
    def __init__(self, limits: SandboxLimits):
        self.limits = limits
        self.scanned = 0
        self.deadline = time.monotonic() + limits.wall_clock_budget_ms / 1000.0

    def scan(self, n: int = 1):
        self.scanned += n
        if self.scanned > self.limits.max_rows_scanned:
            raise ExecError("budget", f"row scan budget exceeded "
                                      f"({self.limits.max_rows_scanned})")
        if self.scanned % 1024 == 0:
            self.check_clock()

    def check_clock(self):
        if time.monotonic() > self.deadline:
            raise ExecError("budget", "wall clock budget exceeded")


def _metric_field(metric: str) -> str:
    if metric not in METRIC_FIELDS:
        raise ExecError("column_absent", f"no column for metric {metric!r}")
    return METRIC_FIELDS[metric]


def _top_k_select(records, metric: str, k: int):
    """Per-year top-k by the primary metric; missing values cannot rank."""
    by_year: dict[int, list] = {}
    for rec in records:
        by_year.setdefault(rec.year, []).append(rec)
    chosen = []
    for year in sorted(by_year):
        candidates = [r for r in by_year[year] if r.metric(metric) is not None]
        reverse = metric != "rank"
        candidates.sort(key=lambda r: (
            -r.metric(metric) if reverse else r.metric(metric),
            r.rank, key_normalize(r.company),
        ))
        chosen.extend(candidates[:k])
    return chosen


def _select(plan: QueryPlan, dataset: Dataset, budget: _Budget | None):
    years = set(plan.boundary.effective_years)
    wanted = {key_normalize(c) for c in plan.companies}
    selected = []
    for rec in dataset.records:
        if budget is not None:
            budget.scan()
        if rec.list_id != plan.list_id:
            continue
        if rec.year not in years:
            continue
        if wanted and key_normalize(rec.company) not in wanted:
            continue
        selected.append(rec)
    if plan.top_k is not None and plan.group is None:
        selected = _top_k_select(selected, plan.metrics[0], plan.top_k)
    return selected


def _canonical_company(dataset: Dataset, raw_name: str) -> str:
    key = key_normalize(raw_name)
    for canonical in dataset.catalog.companies:
        if key_normalize(canonical) == key:
            return canonical
    return raw_name


_AGG_LABELS = {"sum": "Total", "avg": "Average", "count": "Count",
               "min": "Minimum", "max": "Maximum"}


def _aggregate(values: list[float], agg: str):
    if agg == "count":
        raise ValueError("count is handled at the record level")
    if not values:
        return None
    if agg == "sum":
        return math.fsum(values)
    if agg == "avg":
        return math.fsum(values) / len(values)
    if agg == "min":
        return min(values)
    if agg == "max":
        return max(values)
    raise InvalidPlan(f"unknown aggregate {agg!r}")


def execute(plan: QueryPlan, dataset: Dataset,
            limits: SandboxLimits = SandboxLimits()):
    """Run a plan; returns ExecutionResult or raises ExecError.

    Precondition: boundary-rejected plans never reach the executor.
    """
    if plan.boundary.kind == "reject":
        raise InvalidPlan("rejected plans must not be executed")
    if plan.intent in ("persona", "trend"):
        raise InvalidPlan(f"{plan.intent} plans are not executable against the dataset")
    budget = _Budget(limits)
    selected = _select(plan, dataset, budget)
    if not selected:
        raise ExecError("empty", "no records match the plan filters")
    budget.check_clock()

    provenance = {
        "plan": canonical_form(plan),
        "dataset_fingerprint": dataset.load_fingerprint,
    }

    if plan.group is not None:
        table = _group_table(plan, dataset, selected, provenance)
    elif plan.intent == "ranking_qa":
        table = _ranking_table(plan, dataset, selected, provenance)
    elif plan.intent == "chart":
        table = _chart_table(plan, dataset, selected, provenance)
    else:
        table = _metric_table(plan, dataset, selected, provenance)

    if len(table.rows) > limits.max_output_rows:
        raise ExecError("budget", f"output budget exceeded ({limits.max_output_rows})")
    budget.check_clock()

    if plan.intent == "chart":
        spec = build_chart_spec(table, plan)
        return ExecutionResult(table=table, chart_spec=spec,
                               chart_spec_json=chart_spec_to_json(spec))
    return ExecutionResult(table=table)


def _metric_columns(metrics) -> list[Column]:
    cols = [Column("company", "categorical"), Column("year", "temporal")]
    for m in metrics:
        cols.append(Column(_metric_field(m), "quantitative", METRIC_UNITS[m]))
    return cols


def _metric_table(plan, dataset, selected, provenance) -> ResultTable:
    rows = []
    for rec in selected:
        canonical = _canonical_company(dataset, rec.company)
        rows.append((canonical, rec.year,
                     *(rec.metric(m) for m in plan.metrics)))
    rows.sort(key=lambda r: (r[0], r[1]))
    return ResultTable(tuple(_metric_columns(plan.metrics)), tuple(rows), provenance)


def _group_table(plan, dataset, selected, provenance) -> ResultTable:
    dim, agg = plan.group
    metric = plan.metrics[0]
    field = _metric_field(metric)
    out_field = f"{field}_{agg}" if agg != "count" else "company_count"
    unit = METRIC_UNITS[metric] if agg not in ("count",) else "companies"
    groups: dict[tuple, list] = {}
    for rec in selected:
        key = (rec.year, getattr(rec, dim))
        groups.setdefault(key, []).append(rec)
    rows = []
    for (year, dim_value) in sorted(groups):
        recs = groups[(year, dim_value)]
        if agg == "count":
            value = len(recs)
        else:
            value = _aggregate([r.metric(metric) for r in recs
                                if r.metric(metric) is not None], agg)
        rows.append((dim_value, year, value))
    columns = (Column(dim, "categorical"), Column("year", "temporal"),
               Column(out_field, "quantitative", unit))
    return ResultTable(columns, tuple(rows), provenance)


def _ranking_table(plan, dataset, selected, provenance) -> ResultTable:
    metric = plan.metrics[0]
    by_year: dict[int, list] = {}
    for rec in selected:
        by_year.setdefault(rec.year, []).append(rec)
    rows = []
    for year in sorted(by_year):
        recs = by_year[year]
        reverse = metric != "rank"
        recs.sort(key=lambda r: (
            -r.metric(metric) if reverse else r.metric(metric),
            r.rank, key_normalize(r.company),
        ))
        for position, rec in enumerate(recs, start=1):
            rows.append((year, position, _canonical_company(dataset, rec.company),
                         rec.metric(metric)))
    columns = (Column("year", "temporal"), Column("rank", "quantitative", "rank"),
               Column("company", "categorical"),
               Column(_metric_field(metric), "quantitative", METRIC_UNITS[metric]))
    return ResultTable(columns, tuple(rows), provenance)


def _chart_table(plan, dataset, selected, provenance) -> ResultTable:
    metrics = plan.metrics
    rows = []
    for rec in selected:
        canonical = _canonical_company(dataset, rec.company)
        rows.append((canonical, rec.year, rec.rank,
                     *(rec.metric(m) for m in metrics)))
    if plan.chart_type == "bar":
        present = [r for r in rows if r[3] is not None]
        missing = [r for r in rows if r[3] is None]
        present.sort(key=lambda r: (-r[3], r[2], r[0]))
        missing.sort(key=lambda r: (r[0], r[1]))
        rows = present + missing
    elif plan.chart_type == "line":
        rows.sort(key=lambda r: (r[0], r[1]))
    else:  # scatter
        rows.sort(key=lambda r: r[2])
    columns = [Column("company", "categorical"), Column("year", "temporal"),
               Column("rank", "quantitative", "rank")]
    for m in metrics:
        columns.append(Column(_metric_field(m), "quantitative", METRIC_UNITS[m]))
    return ResultTable(tuple(columns), tuple(rows), provenance)


# --- chart spec ---------------------------------------------------------------


def _axis_label(metric: str) -> str:
    return f"{METRIC_LABELS[metric]} ({UNIT_LABELS[METRIC_UNITS[metric]]})"


def build_chart_spec(table: ResultTable, plan: QueryPlan) -> ChartSpec:
    """Compile a ResultTable into the declarative chart description."""
    if plan.intent != "chart":
        raise InvalidPlan("chart spec requires a chart plan")
    if plan.chart_type == "scatter" and len(plan.metrics) != 2:
        raise InvalidPlan("scatter requires two metrics")
    years = plan.boundary.effective_years or plan.time.years

    if plan.group is not None:
        dim, agg = plan.group
        metric = plan.metrics[0]
        y_col = table.columns[2]
        x = {"field": dim, "label": dim.capitalize(), "kind": "categorical"}
        y_desc = f"{_AGG_LABELS[agg]} {METRIC_LABELS[metric].lower()}"
        y = {"field": y_col.name,
             "label": f"{y_desc} ({UNIT_LABELS.get(y_col.unit, y_col.unit)})",
             "kind": "quantitative", "unit": y_col.unit}
        title = f"{y_desc} by {dim}" + (f", {years[0]}" if len(years) == 1 else "")
        ordered = sorted(
            (r for r in table.rows if r[2] is not None),
            key=lambda r: (-r[2], r[0]),
        )
        rows = tuple({x["field"]: dim_value, y["field"]: value}
                     for dim_value, _, value in ordered)
        return _finish_spec("bar", title, x, y, None, rows)

    metric0 = plan.metrics[0]
    f0 = METRIC_FIELDS[metric0]
    if plan.chart_type == "bar":
        x = {"field": "company", "label": "Company", "kind": "categorical"}
        y = {"field": f0, "label": _axis_label(metric0), "kind": "quantitative",
             "unit": METRIC_UNITS[metric0]}
        title = f"{METRIC_LABELS[metric0]} by company, {years[0]}"
        rows = tuple(
            {"company": r[0], f0: r[3]}
            for r in table.rows if r[3] is not None
        )
    elif plan.chart_type == "line":
        companies = sorted({r[0] for r in table.rows})
        multi = len(companies) > 1
        x = {"field": "year", "label": "Year", "kind": "temporal"}
        y = {"field": f0, "label": _axis_label(metric0), "kind": "quantitative",
             "unit": METRIC_UNITS[metric0]}
        title = f"{METRIC_LABELS[metric0]}, {years[0]} to {years[-1]}"
        rows = []
        for r in table.rows:
            if r[3] is None:
                continue
            row = {"year": r[1], f0: r[3]}
            if multi:
                row["company"] = r[0]
            rows.append(row)
        rows = tuple(rows)
        return _finish_spec("line", title, x, y, "company" if multi else None, rows)
    else:  # scatter
        metric1 = plan.metrics[1]
        f1 = METRIC_FIELDS[metric1]
        x = {"field": f0, "label": _axis_label(metric0), "kind": "quantitative"}
        y = {"field": f1, "label": _axis_label(metric1), "kind": "quantitative",
             "unit": METRIC_UNITS[metric1]}
        title = (f"{METRIC_LABELS[metric0]} vs {METRIC_LABELS[metric1].lower()}, "
                 f"{years[0]}")
        rows = tuple(
            {f0: r[3], f1: r[4], "company": r[0]}
            for r in table.rows if r[3] is not None and r[4] is not None
        )
    return _finish_spec(plan.chart_type, title, x, y, None, rows)


def _finish_spec(chart_type, title, x, y, series_field, rows) -> ChartSpec:
    if not rows:
        raise ExecError("empty", "no plottable rows after dropping missing values")
    return ChartSpec(1, chart_type, title, x, y, series_field, tuple(rows))


def chart_spec_to_dict(spec: ChartSpec) -> dict:
    """Dict with the canonical key order (insertion order is the contract)."""
    return {
        "version": spec.version,
        "chart_type": spec.chart_type,
        "title": spec.title,
        "x": {"field": spec.x["field"], "label": spec.x["label"],
              "kind": spec.x["kind"]},
        "y": {"field": spec.y["field"], "label": spec.y["label"],
              "kind": spec.y["kind"], "unit": spec.y["unit"]},
        "series_field": spec.series_field,
        "rows": list(spec.rows),
    }


def table_to_dict(table: ResultTable) -> dict:
    return {
        "columns": [
            {"name": c.name, "kind": c.kind, "unit": c.unit}
            for c in table.columns
        ],
        "rows": [list(row) for row in table.rows],
        "provenance": table.provenance,
    }


def chart_spec_to_json(spec: ChartSpec) -> str:
    """Canonical JSON: fixed key order, no whitespace, shortest floats."""
    return json.dumps(chart_spec_to_dict(spec), ensure_ascii=False,
                      separators=(",", ":"))


def emit_chart_spec(result: ResultTable, plan: QueryPlan) -> str:
    """ChartSpec as canonical JSON text (byte-stable for equal inputs)."""
    return chart_spec_to_json(build_chart_spec(result, plan))
