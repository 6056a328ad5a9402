import csv
import io
import json
import random
from pathlib import Path

import pytest

from bizquery.errors import ExecError, InvalidPlan
from bizquery.metrics_store import CSV_COLUMNS, ingest_csv
from bizquery.oracle import oracle_execute
from bizquery.plan_executor import (
    SandboxLimits,
    build_chart_spec,
    chart_spec_to_json,
    emit_chart_spec,
    execute,
)
from bizquery.query_frontend import QueryPlan, parse_query
from bizquery.temporal import BASIS_EXPLICIT, BoundaryOutcome, ResolvedTime

from conftest import REF_DATE

GOLDEN_DIR = Path(__file__).parent / "goldens"

HEADER = ",".join(CSV_COLUMNS)


def _csv(rows):
    return HEADER + "\n" + "\n".join(rows) + "\n"


def _mk_plan(**kw):
    defaults = dict(
        intent="chart", companies=(), list_id="g500", metrics=("revenue",),
        time=ResolvedTime((2023,), BASIS_EXPLICIT),
        boundary=BoundaryOutcome("in_range", (2023,), None, 2023),
        chart_type="bar",
    )
    defaults.update(kw)
    return QueryPlan(**defaults)


def test_bar_chart_against_raw_cells(ranking_csvs, dataset, g500_companies):
    trio = g500_companies[:3]
    plan = parse_query(f"Plot the revenue for {trio[0]}, {trio[1]} and {trio[2]} in 2024",
                       dataset.catalog, REF_DATE)
    result = execute(plan, dataset)
    spec = result.chart_spec
    assert spec.chart_type == "bar"
    assert spec.x["kind"] == "categorical"
    assert len(spec.rows) == 3

    # line-scan oracle over the raw fixture file
    expected = {}
    for row in csv.DictReader(io.StringIO(ranking_csvs["g500_small.csv"])):
        if row["company"] in trio and row["year"] == "2024":
            expected[row["company"]] = float(row["revenue_musd"])
    got = {r["company"]: r["revenue_musd"] for r in spec.rows}
    assert got == expected


def test_missing_value_stays_in_table_drops_from_chart():
    rows = _csv([
        "g500,2023,1,Acme,,,,,,100.0,,,,,,",
        "g500,2023,2,Beta,,,,,,,,,,,,",  # revenue missing
    ])
    ds = ingest_csv(rows)
    plan = _mk_plan(companies=("Acme", "Beta"))
    result = execute(plan, ds)
    assert len(result.table.rows) == 2
    assert any(r[3] is None for r in result.table.rows)
    assert len(result.chart_spec.rows) == 1


def test_top_k_order():
    rows = _csv([
        "g500,2023,2,A,,,,,,100.0,,,,,,",
        "g500,2023,1,B,,,,,,300.0,,,,,,",
        "g500,2023,3,C,,,,,,200.0,,,,,,",
        "g500,2023,4,D,,,,,,50.0,,,,,,",
    ])
    ds = ingest_csv(rows)
    plan = _mk_plan(top_k=3)
    result = execute(plan, ds)
    assert [r["company"] for r in result.chart_spec.rows] == ["B", "C", "A"]


def test_bar_rows_sorted_descending(dataset, g500_companies):
    plan = parse_query("Plot the revenue for the top 10 companies in 2024",
                       dataset.catalog, REF_DATE)
    spec = execute(plan, dataset).chart_spec
    values = [r["revenue_musd"] for r in spec.rows]
    assert values == sorted(values, reverse=True)


def test_line_ordering_and_series(dataset, g500_companies):
    duo = g500_companies[:2]
    plan = parse_query(f"Show me the revenue for {duo[0]} and {duo[1]} since 2020",
                       dataset.catalog, REF_DATE)
    spec = execute(plan, dataset).chart_spec
    assert spec.chart_type == "line"
    assert spec.series_field == "company"
    keys = [(r["company"], r["year"]) for r in spec.rows]
    assert keys == sorted(keys)


def test_line_single_company_no_series(dataset, g500_companies):
    plan = parse_query(f"Show me the revenue for {g500_companies[0]} since 2014",
                       dataset.catalog, REF_DATE)
    spec = execute(plan, dataset).chart_spec
    assert spec.chart_type == "line"
    assert spec.x["field"] == "year"
    assert spec.x["kind"] == "temporal"
    assert spec.series_field is None
    # clamped to coverage: 2015..2024
    assert {r["year"] for r in spec.rows} == set(range(2015, 2025))


def test_scatter_rows_by_rank(dataset):
    plan = parse_query(
        "Compare the revenue and the number of employees for the top 10 "
        "companies on the Fortune 1000 list", dataset.catalog, REF_DATE)
    result = execute(plan, dataset)
    assert result.chart_spec.x["kind"] == "quantitative"
    ranks = [row[2] for row in result.table.rows]
    assert ranks == sorted(ranks)


def test_emit_deterministic(dataset, g500_companies):
    plan = parse_query(f"Plot the revenue for {g500_companies[0]} in 2024",
                       dataset.catalog, REF_DATE)
    r1 = execute(plan, dataset)
    r2 = execute(plan, dataset)
    assert r1.chart_spec_json == r2.chart_spec_json
    assert emit_chart_spec(r1.table, plan) == r1.chart_spec_json


@pytest.mark.parametrize("name", ["bar", "line", "scatter"])
def test_golden_chart_specs(dataset, g500_companies, name):
    plans = {
        "bar": f"Plot the revenue for {g500_companies[0]}, {g500_companies[1]} "
               f"and {g500_companies[2]} in 2024",
        "line": f"Show me the profits for {g500_companies[0]} since 2020",
        "scatter": "Compare the revenue and the number of employees for the "
                   "top 5 companies on the Fortune 1000 list",
    }
    plan = parse_query(plans[name], dataset.catalog, REF_DATE)
    got = execute(plan, dataset).chart_spec_json
    golden = (GOLDEN_DIR / f"{name}.json").read_text(encoding="utf-8").strip()
    assert got == golden


def test_budget_rows_exceeded(dataset, g500_companies):
    plan = parse_query(f"What was {g500_companies[0]}'s revenue in 2024?",
                       dataset.catalog, REF_DATE)
    with pytest.raises(ExecError) as err:
        execute(plan, dataset, SandboxLimits(max_rows_scanned=10))
    assert err.value.kind == "budget"


def test_budget_wall_clock(monkeypatch, dataset, g500_companies):
    import bizquery.plan_executor as pe

    plan = parse_query(f"What was {g500_companies[0]}'s revenue in 2024?",
                       dataset.catalog, REF_DATE)
    clock = iter([0.0] + [10.0] * 50)
    monkeypatch.setattr(pe.time, "monotonic", lambda: next(clock))
    with pytest.raises(ExecError) as err:
        execute(plan, dataset, SandboxLimits(wall_clock_budget_ms=1))
    assert err.value.kind == "budget"


def test_empty_result(dataset):
    plan = _mk_plan(companies=("Nonexistent Co",),
                    time=ResolvedTime((2024,), BASIS_EXPLICIT),
                    boundary=BoundaryOutcome("in_range", (2024,), None, 2024))
    with pytest.raises(ExecError) as err:
        execute(plan, dataset)
    assert err.value.kind == "empty"


def test_reject_plan_refused(dataset):
    plan = _mk_plan(boundary=BoundaryOutcome("reject", (), None, 2024))
    with pytest.raises(InvalidPlan):
        execute(plan, dataset)


def test_scatter_single_metric_invalid():
    with pytest.raises(InvalidPlan):
        _mk_plan(chart_type="scatter", metrics=("revenue",))


def test_no_fabrication(dataset):
    """Every plotted value exists verbatim in the ingested records."""
    stored = set()
    for rec in dataset.records:
        for m in ("revenue", "profits", "assets", "market_value",
                  "employees", "eps", "revenue_change_pct"):
            v = rec.metric(m)
            if v is not None:
                stored.add(float(v))
    rng = random.Random(21)
    companies = sorted(c for c, i in dataset.catalog.companies.items()
                       if "g500" in i.coverage)
    for _ in range(30):
        names = tuple(sorted(rng.sample(companies, 3)))
        year = rng.randint(2015, 2024)
        plan = _mk_plan(companies=names,
                        time=ResolvedTime((year,), BASIS_EXPLICIT),
                        boundary=BoundaryOutcome("in_range", (year,), None, 2024),
                        metrics=(rng.choice(["revenue", "profits", "market_value"]),))
        try:
            spec = execute(plan, dataset).chart_spec
        except ExecError:
            continue
        for row in spec.rows:
            for key, value in row.items():
                if isinstance(value, (int, float)) and key != "year":
                    assert float(value) in stored


def test_oracle_equivalence_sample(dataset, g500_companies):
    queries = [
        f"Plot the revenue for {g500_companies[0]} and {g500_companies[3]} in 2021",
        f"Show me the assets of {g500_companies[5]} from 2016 to 2023",
        "What are the top 7 companies by employees in 2019?",
        "What was the total profits by sector in 2022?",
        "Compare the profits and the assets for the top 8 companies on the "
        "Fortune 1000 list in 2020",
    ]
    for q in queries:
        plan = parse_query(q, dataset.catalog, REF_DATE)
        got = execute(plan, dataset).table
        want = oracle_execute(plan, dataset)
        assert got.columns == want.columns, q
        assert got.rows == want.rows, q


def test_oracle_agrees_on_empty(dataset):
    plan = _mk_plan(companies=("Nonexistent Co",),
                    time=ResolvedTime((2024,), BASIS_EXPLICIT),
                    boundary=BoundaryOutcome("in_range", (2024,), None, 2024))
    with pytest.raises(ExecError):
        execute(plan, dataset)
    with pytest.raises(ExecError):
        oracle_execute(plan, dataset)


def test_single_row_dataset_equivalence():
    ds = ingest_csv(_csv(["g500,2023,1,Solo,,,,,,42.5,,,,,,"]))
    plan = _mk_plan(companies=("Solo",))
    got = execute(plan, ds).table
    want = oracle_execute(plan, ds)
    assert got == want


def test_chart_spec_json_key_order(dataset, g500_companies):
    plan = parse_query(f"Plot the revenue for {g500_companies[0]} in 2024",
                       dataset.catalog, REF_DATE)
    payload = json.loads(execute(plan, dataset).chart_spec_json)
    assert list(payload) == ["version", "chart_type", "title", "x", "y",
                             "series_field", "rows"]
    assert list(payload["x"]) == ["field", "label", "kind"]
    assert list(payload["y"]) == ["field", "label", "kind", "unit"]
