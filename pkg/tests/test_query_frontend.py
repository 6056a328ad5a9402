import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bizquery.eval_harness import _Sampler, load_templates
from bizquery.query_frontend import (
    ParseDiagnostics,
    QueryPlan,
    canonical_form,
    classify_intent,
    parse_query,
)

from conftest import REF_DATE


def test_classify_persona():
    text = "Are there any philosophical principles embedded in your programming?"
    assert classify_intent(text) == "persona"


def test_classify_chart():
    assert classify_intent("Plot the revenue for Apple, Google and Nvidia in 2024") == "chart"
    assert classify_intent("Show me the revenue for Apple since 2014") == "chart"
    assert classify_intent("Can you show me a graph comparing the revenue of the top 10 companies over the last decade?") == "chart"


def test_classify_ranking_trend_metric():
    assert classify_intent("What are the top 10 companies in 2024?") == "ranking_qa"
    assert classify_intent("How has ai evolved over time?") == "trend"
    assert classify_intent("What was Walmart's revenue in 2024?") == "metric_qa"
    # "show" without a metric is not a chart verb
    assert classify_intent("Show the trend of inflation coverage from 2019 to 2024") == "trend"


def test_classify_empty_rejected():
    with pytest.raises(ValueError):
        classify_intent("   ")


def test_parse_metric_qa(catalog, g500_companies):
    c = g500_companies[0]
    plan = parse_query(f"What was {c}'s revenue in 2024?", catalog, REF_DATE)
    assert isinstance(plan, QueryPlan)
    assert plan.intent == "metric_qa"
    assert plan.companies == (c,)
    assert plan.metrics == ("revenue",)
    assert plan.boundary.kind == "in_range"
    assert plan.boundary.effective_years == (2024,)
    assert canonical_form(plan) == f"metric company={c} metric=revenue years=2024"


def test_parse_out_of_domain(catalog):
    got = parse_query("What was the average stock price of Apple in 2025?",
                      catalog, REF_DATE)
    assert isinstance(got, ParseDiagnostics)
    assert got.kind == "out_of_domain"
    assert "stock" not in got.message  # names supported metrics, not the bad one
    assert "revenue" in got.message


def test_parse_scatter_fortune_1000(catalog):
    text = ("Compare the revenue and the number of employees for the top 10 "
            "companies on the Fortune 1000 list")
    plan = parse_query(text, catalog, REF_DATE)
    assert isinstance(plan, QueryPlan)
    assert plan.intent == "chart"
    assert plan.chart_type == "scatter"
    assert plan.metrics == ("revenue", "employees")
    assert plan.top_k == 10
    assert plan.list_id == "f1000"
    assert plan.boundary.effective_years == (2024,)


def test_parse_unknown_entity(catalog):
    got = parse_query("What was Zzzz Industries' revenue in 2024?",
                      catalog, REF_DATE)
    assert isinstance(got, ParseDiagnostics)
    assert got.kind == "unknown_entity"
    assert 1 <= len(got.suggestions) <= 3


def test_parse_boundary_reject(catalog, g500_companies):
    plan = parse_query(f"What was {g500_companies[0]}'s revenue in 2031?",
                       catalog, REF_DATE)
    assert isinstance(plan, QueryPlan)
    assert plan.boundary.kind == "reject"
    assert plan.boundary.latest_available == 2024


def test_canonical_sorted_companies(catalog, g500_companies):
    a, b = g500_companies[0], g500_companies[1]
    p1 = parse_query(f"Plot the revenue for {a} and {b} in 2024", catalog, REF_DATE)
    p2 = parse_query(f"Plot the revenue for {b} and {a} in 2024", catalog, REF_DATE)
    assert canonical_form(p1) == canonical_form(p2)
    assert p1.companies == tuple(sorted((a, b)))


def test_canonical_form_shapes(catalog, g500_companies):
    c = g500_companies[0]
    metric_plan = parse_query(f"What was {c}'s revenue in 2024?", catalog, REF_DATE)
    assert canonical_form(metric_plan).startswith("metric company=")
    chart_plan = parse_query(f"Plot the revenue for {c} in 2024", catalog, REF_DATE)
    assert canonical_form(chart_plan) == \
        f"chart bar list=g500 metrics=revenue companies={c} years=2024"


def test_discrete_year_set(catalog, g500_companies):
    c = g500_companies[0]
    plan = parse_query(f"What was {c}'s revenue in 2016, 2019 and 2022?",
                       catalog, REF_DATE)
    assert plan.time.years == (2016, 2019, 2022)
    assert canonical_form(plan).endswith("years=2016,2019,2022")


def test_chart_company_cap(catalog, g500_companies):
    names = ", ".join(g500_companies[:11])
    got = parse_query(f"Plot the revenue for {names} in 2024", catalog, REF_DATE)
    assert isinstance(got, ParseDiagnostics)
    assert got.kind == "out_of_grammar"
    assert "top" in got.message.lower()


def test_malformed_range_diagnostics(catalog, g500_companies):
    got = parse_query(f"Plot the revenue of {g500_companies[0]} from 2024 to 2020",
                      catalog, REF_DATE)
    assert isinstance(got, ParseDiagnostics)
    assert got.kind == "out_of_grammar"


def test_explicit_bar_over_years_becomes_line(catalog, g500_companies):
    c = g500_companies[0]
    plan = parse_query(f"Draw a bar chart of the revenue of {c} from 2019 to 2022",
                       catalog, REF_DATE)
    assert plan.chart_type == "line"


def test_unknown_list_diagnostics(catalog):
    got = parse_query("What are the top 5 companies on the Fortune 500 list in 2024?",
                      catalog, REF_DATE)
    assert isinstance(got, ParseDiagnostics)
    assert "f500" in got.message


def test_grammar_benchmark_independence(dataset):
    """Every generated prompt parses back to its authored intended plan."""
    from bizquery.eval_harness import gen_templated_prompts

    cases = gen_templated_prompts(None, dataset, seed=123, n=160, suite="all")
    for case in cases:
        parsed = parse_query(case.prompt, dataset.catalog, REF_DATE)
        assert isinstance(parsed, QueryPlan), \
            f"{case.template_id}: {case.prompt!r} -> {parsed}"
        assert canonical_form(parsed) == case.intended_plan, case.prompt


def test_paraphrase_stability(dataset):
    """All paraphrases of a template map to the same canonical plan."""
    payload = load_templates(None)
    sampler = _Sampler(dataset, payload, REF_DATE)
    rng = random.Random(5)
    for tpl in payload["templates"]:
        values = None
        for _ in range(30):
            try:
                values, plan, _ = sampler.build(tpl["kind"], rng)
                break
            except Exception:
                continue
        assert values is not None, tpl["id"]
        assert len(tpl.get("paraphrases", ())) >= 3, tpl["id"]
        forms = set()
        for text_tpl in (tpl["prompt"], *tpl["paraphrases"]):
            prompt = text_tpl.format(**values)
            parsed = parse_query(prompt, dataset.catalog, REF_DATE)
            assert isinstance(parsed, QueryPlan), f"{tpl['id']}: {prompt!r} -> {parsed}"
            forms.add(canonical_form(parsed))
        assert len(forms) == 1, f"{tpl['id']}: {forms}"


@settings(max_examples=120, deadline=None)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=80))
def test_parse_total_over_text(catalog, text):
    if not text.strip():
        return
    got = parse_query(text, catalog, REF_DATE)
    assert isinstance(got, (QueryPlan, ParseDiagnostics))


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_intent_invariant_under_company_swap(g500_companies, data):
    a = data.draw(st.sampled_from(g500_companies[:20]))
    b = data.draw(st.sampled_from(g500_companies[:20]))
    template = data.draw(st.sampled_from([
        "What was {c}'s revenue in 2024?",
        "Plot the profits of {c} in 2023",
        "Show me the employees of {c} since 2018",
        "What are the top 5 companies by revenue in 2024?",
    ]))
    assert classify_intent(template.format(c=a)) == classify_intent(template.format(c=b))
