"""
From natural language to a chart specification
==============================================

A chart question compiles to a structured plan, executes in the sandbox,
and yields a canonical-JSON ChartSpec plus a rendered caption. The same
data flows for bar, line, and scatter shapes.
"""

from datetime import date

from bizquery.fixtures import gen_ranking_csv
from bizquery.metrics_store import ingest_files
from bizquery.plan_executor import SandboxLimits, execute
from bizquery.query_frontend import canonical_form, parse_query
from bizquery.responder import render_answer

csvs = gen_ranking_csv(seed=42)
dataset = ingest_files([(n, t.encode()) for n, t in sorted(csvs.items())])
ref_date = date(2025, 6, 15)
g500 = sorted(c for c, i in dataset.catalog.companies.items() if "g500" in i.coverage)
a, b, c = g500[:3]

questions = [
    f"Plot the revenue for {a}, {b} and {c} in 2024",
    f"Show me the revenue for {a}, {b} and {c} since 2014",
    "Compare the revenue and the number of employees for the top 10 "
    "companies on the Fortune 1000 list",
    "Plot the total revenue by sector in 2024",
]
for question in questions:
    plan = parse_query(question, dataset.catalog, ref_date)
    print("\nQ:", question)
    print("plan:", canonical_form(plan))
    result = execute(plan, dataset, SandboxLimits())
    spec = result.chart_spec
    print(f"{spec.chart_type}: x={spec.x['field']} y={spec.y['field']} "
          f"series={spec.series_field} rows={len(spec.rows)}")
    print("caption:", render_answer(plan, result).text)

# the serialized spec is byte-stable: equal plans, equal bytes
plan = parse_query(questions[0], dataset.catalog, ref_date)
assert execute(plan, dataset).chart_spec_json == execute(plan, dataset).chart_spec_json
print("\nchart spec bytes are deterministic")
