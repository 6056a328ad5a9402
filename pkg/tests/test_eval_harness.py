import json

import pytest

from bizquery.errors import EmptySuite, TemplateError
from bizquery.eval_harness import (
    BenchmarkCase,
    gen_templated_prompts,
    load_templates,
    run_qa_eval,
    run_safety_eval,
    run_viz_eval,
)
from bizquery.fixtures import gen_clean_sentences, gen_safety_suite


def test_generation_deterministic(dataset):
    a = gen_templated_prompts(None, dataset, seed=42, n=60, suite="viz")
    b = gen_templated_prompts(None, dataset, seed=42, n=60, suite="viz")
    assert [(c.prompt, c.intended_plan) for c in a] == \
        [(c.prompt, c.intended_plan) for c in b]
    c = gen_templated_prompts(None, dataset, seed=43, n=60, suite="viz")
    assert [x.prompt for x in a] != [x.prompt for x in c]


def test_unknown_slot_rejected(tmp_path, dataset):
    payload = load_templates(None)
    payload["templates"][0]["prompt"] = "Plot the {nonexistent} for {c1}"
    bad = tmp_path / "templates.json"
    bad.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(TemplateError):
        gen_templated_prompts(bad, dataset, seed=1, n=5, suite="viz")


def test_case_fields(dataset):
    cases = gen_templated_prompts(None, dataset, seed=9, n=30, suite="viz")
    for case in cases:
        assert case.prompt
        assert case.intended_plan
        assert case.cls in ("bar", "line", "scatter", "table")
        assert case.expected["row_count"] >= 1


def test_viz_report_accounting(dataset):
    cases = gen_templated_prompts(None, dataset, seed=42, n=80, suite="viz")
    report = run_viz_eval(cases, dataset)
    n = report.n_cases
    assert report.execution_rate * n == \
        n - report.parse_errors - report.runtime_errors
    assert report.execution_rate == 1.0
    assert report.data_match_rate == 1.0
    assert sum(slot["cases"] for slot in report.per_class.values()) == n


def test_parse_failure_counts_in_denominator(dataset):
    cases = gen_templated_prompts(None, dataset, seed=3, n=9, suite="viz")
    broken = BenchmarkCase(
        case_id="bad-0", template_id="handmade", cls="table", rubric=None,
        prompt="gibberish with no recognizable metric words",
        intended_plan="metric company=X metric=revenue years=2024",
        plan=None, expected={"columns": [], "rows": [], "row_count": 0},
    )
    report = run_viz_eval(cases + [broken], dataset)
    assert report.parse_errors == 1
    assert report.execution_rate == 9 / 10
    assert any(f["stage"] == "parse" for f in report.failures)
    # failures carry provenance for isolated re-runs
    failure = report.failures[0]
    assert {"case_id", "prompt", "intended_plan"} <= set(failure)


def test_wrong_value_fails_data_match_only(dataset):
    cases = gen_templated_prompts(None, dataset, seed=4, n=3, suite="viz")
    case = cases[0]
    tampered = dict(case.expected)
    tampered_rows = [list(r) for r in tampered["rows"]]
    for row in tampered_rows:
        for i, cell in enumerate(row):
            if isinstance(cell, float):
                row[i] = cell + 1.0
                break
        else:
            continue
        break
    tampered["rows"] = tampered_rows
    if "chart_rows" in tampered:
        rows = [dict(r) for r in tampered["chart_rows"]]
        for r in rows:
            for k, v in r.items():
                if isinstance(v, float):
                    r[k] = v + 1.0
                    break
            break
        tampered["chart_rows"] = rows
    bad_case = BenchmarkCase(
        case_id=case.case_id, template_id=case.template_id, cls=case.cls,
        rubric=None, prompt=case.prompt, intended_plan=case.intended_plan,
        plan=case.plan, expected=tampered,
    )
    report = run_viz_eval([bad_case], dataset)
    assert report.execution_rate == 1.0
    assert report.axes_match_rate == 1.0
    assert report.row_count_match_rate == 1.0
    assert report.data_match_rate == 0.0


def test_qa_eval_all_rubrics_pass(engine_ctx):
    cases = gen_templated_prompts(None, engine_ctx.dataset, seed=11, n=120,
                                  suite="qa")
    rubrics = {c.rubric for c in cases}
    assert rubrics == {"exact_match", "reject_with_latest", "redirect_closest",
                       "top5", "top10"}
    report = run_qa_eval(cases, engine_ctx)
    assert report.qa_rubric_pass_rates == {r: 1.0 for r in sorted(rubrics)}


def test_safety_eval_rates(lexicons):
    harmful = run_safety_eval(gen_safety_suite(42), lexicons)
    assert harmful.safety_rejection_rate == 1.0
    assert harmful.non_rejected == []
    clean = run_safety_eval([{"prompt": s} for s in gen_clean_sentences(42)],
                            lexicons)
    assert clean.safety_rejection_rate == 0.0
    assert len(clean.non_rejected) == 500


def test_safety_breakdown_sums(lexicons):
    report = run_safety_eval(gen_safety_suite(42), lexicons)
    total = sum(slot["total"] for slot in report.safety_breakdown.values())
    assert total == report.n_cases


def test_empty_suite(lexicons):
    with pytest.raises(EmptySuite):
        run_safety_eval([], lexicons)


def test_report_dict_shape(dataset):
    cases = gen_templated_prompts(None, dataset, seed=5, n=20, suite="viz")
    payload = run_viz_eval(cases, dataset).to_dict()
    assert payload["error_taxonomy"] == {"parse_errors": 0, "runtime_errors": 0}
    assert set(payload["latency_ms"]) <= {"bar", "line", "scatter", "table"}
    assert payload["limitations"]
