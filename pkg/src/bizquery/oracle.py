"""Independent reference executor used by tests and the eval harness.

This module re-implements the execution contract documented in
``plan_executor`` with naive full scans and its own helper code. It
deliberately shares no filtering, sorting, or aggregation code with the
production executor: when the two agree on a plan, that agreement is the
evidence. Keep it simple and obviously correct rather than fast.
"""

from __future__ import annotations

import math

from .errors import ExecError, InvalidPlan
from .metrics_store import Dataset
from .plan_executor import Column, ResultTable
from .query_frontend import QueryPlan, canonical_form

_FIELD_OF = {
    "revenue": "revenue_musd",
    "profits": "profits_musd",
    "assets": "assets_musd",
    "market_value": "market_value_musd",
    "employees": "employees",
    "revenue_change_pct": "revenue_change_pct",
    "eps": "eps",
    "rank": "rank",
}

_UNIT_OF = {
    "revenue": "millions_usd",
    "profits": "millions_usd",
    "assets": "millions_usd",
    "market_value": "millions_usd",
    "employees": "people",
    "revenue_change_pct": "percent",
    "eps": "usd_per_share",
    "rank": "rank",
}


def _norm(name: str) -> str:
    pieces = []
    for token in name.casefold().split():
        pieces.append(token.strip(".,"))
    return " ".join(pieces)


def _value(record, metric: str):
    if metric == "rank":
        return record.rank
    return getattr(record, metric)


def _canonical(dataset: Dataset, raw: str) -> str:
    target = _norm(raw)
    for name in dataset.catalog.companies:
        if _norm(name) == target:
            return name
    return raw


def _filtered(plan: QueryPlan, dataset: Dataset):
    keep = []
    allowed_years = list(plan.boundary.effective_years)
    company_keys = [_norm(c) for c in plan.companies]
    for record in dataset.records:
        if record.list_id != plan.list_id:
            continue
        if record.year not in allowed_years:
            continue
        if company_keys and _norm(record.company) not in company_keys:
            continue
        keep.append(record)
    if plan.top_k is not None and plan.group is None:
        per_year: dict[int, list] = {}
        for record in keep:
            per_year.setdefault(record.year, []).append(record)
        keep = []
        metric = plan.metrics[0]
        for year in sorted(per_year):
            usable = [r for r in per_year[year] if _value(r, metric) is not None]
            if metric == "rank":
                usable.sort(key=lambda r: (_value(r, metric), r.rank, _norm(r.company)))
            else:
                usable.sort(key=lambda r: (-_value(r, metric), r.rank, _norm(r.company)))
            keep.extend(usable[: plan.top_k])
    return keep


def oracle_execute(plan: QueryPlan, dataset: Dataset) -> ResultTable:
    """Naive full-scan execution; same output contract as execute()."""
    if plan.boundary.kind == "reject":
        raise InvalidPlan("rejected plans must not be executed")
    if plan.intent in ("persona", "trend"):
        raise InvalidPlan(f"{plan.intent} plans are not executable against the dataset")
    records = _filtered(plan, dataset)
    if not records:
        raise ExecError("empty", "no records match the plan filters")
    provenance = {
        "plan": canonical_form(plan),
        "dataset_fingerprint": dataset.load_fingerprint,
    }
    if plan.group is not None:
        table = _grouped(plan, records, provenance)
    elif plan.intent == "ranking_qa":
        table = _ranked(plan, dataset, records, provenance)
    elif plan.intent == "chart":
        table = _chart(plan, dataset, records, provenance)
    else:
        table = _plain(plan, dataset, records, provenance)
    if plan.intent == "chart" and not oracle_chart_rows(table, plan):
        raise ExecError("empty", "no plottable rows after dropping missing values")
    return table


def _plain(plan, dataset, records, provenance) -> ResultTable:
    rows = []
    for record in records:
        cells = [_canonical(dataset, record.company), record.year]
        for metric in plan.metrics:
            cells.append(_value(record, metric))
        rows.append(tuple(cells))
    rows.sort(key=lambda row: (row[0], row[1]))
    columns = [Column("company", "categorical"), Column("year", "temporal")]
    for metric in plan.metrics:
        columns.append(Column(_FIELD_OF[metric], "quantitative", _UNIT_OF[metric]))
    return ResultTable(tuple(columns), tuple(rows), provenance)


def _grouped(plan, records, provenance) -> ResultTable:
    dim, agg = plan.group
    metric = plan.metrics[0]
    buckets: dict[tuple, list] = {}
    for record in records:
        buckets.setdefault((record.year, getattr(record, dim)), []).append(record)
    rows = []
    for (year, dim_value) in sorted(buckets):
        members = buckets[(year, dim_value)]
        if agg == "count":
            result = len(members)
        else:
            present = [_value(r, metric) for r in members
                       if _value(r, metric) is not None]
            if not present:
                result = None
            elif agg == "sum":
                result = math.fsum(present)
            elif agg == "avg":
                result = math.fsum(present) / len(present)
            elif agg == "min":
                result = min(present)
            elif agg == "max":
                result = max(present)
            else:
                raise InvalidPlan(f"unknown aggregate {agg!r}")
        rows.append((dim_value, year, result))
    if agg == "count":
        value_col = Column("company_count", "quantitative", "companies")
    else:
        value_col = Column(f"{_FIELD_OF[metric]}_{agg}", "quantitative", _UNIT_OF[metric])
    columns = (Column(dim, "categorical"), Column("year", "temporal"), value_col)
    return ResultTable(columns, tuple(rows), provenance)


def _ranked(plan, dataset, records, provenance) -> ResultTable:
    metric = plan.metrics[0]
    rows = []
    for year in sorted({r.year for r in records}):
        in_year = [r for r in records if r.year == year]
        if metric == "rank":
            in_year.sort(key=lambda r: (_value(r, metric), r.rank, _norm(r.company)))
        else:
            in_year.sort(key=lambda r: (-_value(r, metric), r.rank, _norm(r.company)))
        position = 0
        for record in in_year:
            position += 1
            rows.append((year, position, _canonical(dataset, record.company),
                         _value(record, metric)))
    columns = (
        Column("year", "temporal"),
        Column("rank", "quantitative", "rank"),
        Column("company", "categorical"),
        Column(_FIELD_OF[metric], "quantitative", _UNIT_OF[metric]),
    )
    return ResultTable(columns, tuple(rows), provenance)


def _chart(plan, dataset, records, provenance) -> ResultTable:
    rows = []
    for record in records:
        cells = [_canonical(dataset, record.company), record.year, record.rank]
        for metric in plan.metrics:
            cells.append(_value(record, metric))
        rows.append(tuple(cells))
    if plan.chart_type == "bar":
        with_value = [r for r in rows if r[3] is not None]
        without = [r for r in rows if r[3] is None]
        with_value.sort(key=lambda r: (-r[3], r[2], r[0]))
        without.sort(key=lambda r: (r[0], r[1]))
        rows = with_value + without
    elif plan.chart_type == "line":
        rows.sort(key=lambda r: (r[0], r[1]))
    else:
        rows.sort(key=lambda r: r[2])
    columns = [Column("company", "categorical"), Column("year", "temporal"),
               Column("rank", "quantitative", "rank")]
    for metric in plan.metrics:
        columns.append(Column(_FIELD_OF[metric], "quantitative", _UNIT_OF[metric]))
    return ResultTable(tuple(columns), tuple(rows), provenance)


def oracle_chart_rows(table: ResultTable, plan: QueryPlan) -> list[dict]:
    """Expected plotted rows: drop records whose plotted value is missing."""
    out = []
    if plan.group is not None:
        dim = plan.group[0]
        field = table.columns[2].name
        usable = [r for r in table.rows if r[2] is not None]
        usable.sort(key=lambda r: (-r[2], r[0]))
        for dim_value, _year, value in usable:
            out.append({dim: dim_value, field: value})
        return out
    field0 = _FIELD_OF[plan.metrics[0]]
    if plan.chart_type == "bar":
        for row in table.rows:
            if row[3] is not None:
                out.append({"company": row[0], field0: row[3]})
    elif plan.chart_type == "line":
        companies = sorted({r[0] for r in table.rows})
        for row in table.rows:
            if row[3] is None:
                continue
            point = {"year": row[1], field0: row[3]}
            if len(companies) > 1:
                point["company"] = row[0]
            out.append(point)
    else:
        field1 = _FIELD_OF[plan.metrics[1]]
        for row in table.rows:
            if row[3] is not None and row[4] is not None:
                out.append({field0: row[3], field1: row[4], "company": row[0]})
    return out
