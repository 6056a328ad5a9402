"""
The evaluation harness at desk scale
====================================

Templated prompts are filled from the catalog, expectations come from the
independent reference executor, and the report decomposes failures into
parse errors, runtime errors, and data mismatches (axes, values, row
counts), per chart type.
"""

import json
from datetime import date

from bizquery.eval_harness import (
    gen_templated_prompts,
    run_qa_eval,
    run_safety_eval,
    run_viz_eval,
)
from bizquery.fixtures import gen_ranking_csv, gen_safety_suite, write_fixture_tree
from bizquery.guardrails import load_lexicons
from bizquery.metrics_store import ingest_files
from bizquery.pipeline import build_context
import tempfile

csvs = gen_ranking_csv(seed=42)
dataset = ingest_files([(n, t.encode()) for n, t in sorted(csvs.items())])

cases = gen_templated_prompts(None, dataset, seed=42, n=200, suite="viz")
print("sample prompts:")
for case in cases[:4]:
    print("  -", case.prompt)
    print("    plan:", case.intended_plan)

report = run_viz_eval(cases, dataset)
print("\nviz: execution", report.execution_rate, "| data match",
      report.data_match_rate)
print("per class:", json.dumps(report.per_class))

tmp = tempfile.mkdtemp()
write_fixture_tree(tmp, 42)
ctx = build_context(f"{tmp}/data", f"{tmp}/corpus/articles.jsonl", date(2025, 6, 15))
qa_cases = gen_templated_prompts(None, dataset, seed=7, n=100, suite="qa")
qa = run_qa_eval(qa_cases, ctx)
print("\nqa rubric pass rates:", qa.qa_rubric_pass_rates)

safety = run_safety_eval(gen_safety_suite(42), load_lexicons())
print("\nsafety rejection rate:", safety.safety_rejection_rate,
      "| residue for review:", len(safety.non_rejected))
