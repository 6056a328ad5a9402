"""Deterministic answer rendering from execution results and rejections.

All prose comes from fixed templates in the grammar config so that equal
inputs produce byte-equal text. One hard rule shapes every template: any
digit sequence appearing in the answer text must also appear in the
payload (as a stored value, a year, a rank, or a bucket date). Numbers the
reader should see but that have no payload backing (such as the year that
was rejected) go into ``boundary_note`` instead of the text.

Formatting: monetary millions get thousands separators and one decimal,
employees are plain integers with separators, EPS two decimals, percent
one decimal.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from datetime import date

from .errors import ExecError
from .guardrails import GuardrailVerdict
from .metrics_store import (
    KNOWN_LIST_NAMES,
    METRIC_LABELS,
    Dataset,
    MetricValue,
    NotFound,
    lookup_metric,
)
from .plan_executor import ChartSpec, Column, ExecutionResult, ResultTable
from .query_frontend import Grammar, ParseDiagnostics, QueryPlan, canonical_form, default_grammar
from .temporal import BoundaryOutcome
from .trends import TrendSeries, TrendSummary, series_to_dict

_AGG_LABELS = {"sum": "Total", "avg": "Average", "count": "Number of companies",
               "min": "Minimum", "max": "Maximum"}


@dataclass(frozen=True, slots=True)
class Answer:
    kind: str  # metric | ranking | chart | trend | persona | rejection
    text: str
    table: ResultTable | None = None
    chart_spec: ChartSpec | None = None
    chart_spec_json: str | None = None
    trend: TrendSeries | None = None
    trend_summary: TrendSummary | None = None
    citations: tuple = ()
    boundary_note: str | None = None
    safety: dict | None = None
    provenance: dict | None = None


def format_value(value, unit: str) -> str:
    """Unit-aware display form; also the reference form for digit audits."""
    if value is None:
        return "n/a"
    if unit == "millions_usd":
        return f"${value:,.1f} million"
    if unit == "percent":
        return f"{value:,.1f}%"
    if unit == "usd_per_share":
        return f"${value:,.2f}"
    if unit == "people":
        return f"{value:,}"
    if unit == "rank":
        return str(value)
    if unit == "companies":
        return str(value)
    return str(value)


def _list_display(list_id: str) -> str:
    return KNOWN_LIST_NAMES.get(list_id, list_id)


def _metric_sentence(tpl: dict, company: str, metric: str, year: int, value,
                     unit: str, list_id: str) -> str:
    label = METRIC_LABELS[metric]
    if value is None:
        return tpl["metric_missing"].format(
            company=company, metric_label=label.lower(), year=year,
            list_name=_list_display(list_id))
    formatted = format_value(value, unit)
    if unit == "millions_usd":
        # template embeds the $/million framing itself
        return tpl["metric_millions_usd"].format(
            company=company, metric_label=label.lower(), year=year,
            value=f"{value:,.1f}")
    if unit == "people":
        return tpl["metric_people"].format(company=company, value=formatted, year=year)
    if unit == "percent":
        return tpl["metric_percent"].format(
            company=company, metric_label=label.lower(), year=year,
            value=f"{value:,.1f}")
    if unit == "usd_per_share":
        return tpl["metric_usd_per_share"].format(
            company=company, metric_label=label, year=year, value=f"{value:,.2f}")
    if unit == "rank":
        return tpl["metric_rank"].format(
            company=company, value=value, year=year, list_name=_list_display(list_id))
    return f"{company}'s {label.lower()} in {year} was {formatted}."


def _boundary_note(plan: QueryPlan, grammar: Grammar) -> str | None:
    boundary = plan.boundary
    tpl = grammar.answer_templates
    if boundary.kind == "redirect":
        return tpl["redirect_note"].format(
            requested=plan.time.years[0], target=boundary.nearest_available)
    if boundary.kind == "in_range" and set(boundary.effective_years) != set(plan.time.years):
        effective = boundary.effective_years
        shown = (f"{effective[0]}..{effective[-1]}"
                 if list(effective) == list(range(effective[0], effective[-1] + 1))
                 else ",".join(str(y) for y in effective))
        return tpl["clamp_note"].format(effective=shown)
    return None


def render_answer(plan: QueryPlan, result: ExecutionResult,
                  grammar: Grammar | None = None) -> Answer:
    """Render an executed plan. Metric answers state company, metric, year,
    value, and unit; ranking answers enumerate rank order; clamps and
    redirects are verbalized in boundary_note."""
    grammar = grammar or default_grammar()
    tpl = grammar.answer_templates
    table = result.table
    note = _boundary_note(plan, grammar)

    if plan.intent == "chart":
        text = tpl["chart_caption"].format(title=result.chart_spec.title)
        return Answer(kind="chart", text=text, table=table,
                      chart_spec=result.chart_spec,
                      chart_spec_json=result.chart_spec_json,
                      boundary_note=note)

    if plan.intent == "ranking_qa":
        parts = []
        years = sorted({row[0] for row in table.rows})
        metric = plan.metrics[0]
        unit = table.columns[3].unit
        for year in years:
            header = tpl["ranking_header"].format(
                list_name=_list_display(plan.list_id),
                metric_label=METRIC_LABELS[metric].lower(), year=year)
            items = [
                tpl["ranking_item"].format(rank=row[1], company=row[2],
                                           value=format_value(row[3], unit))
                for row in table.rows if row[0] == year
            ]
            parts.append(header + " " + "; ".join(items) + ".")
        return Answer(kind="ranking", text=" ".join(parts), table=table,
                      boundary_note=note)

    # metric_qa (plain or grouped)
    if plan.group is not None:
        dim, agg = plan.group
        metric = plan.metrics[0]
        unit = table.columns[2].unit
        parts = []
        years = sorted({row[1] for row in table.rows})
        for year in years:
            header = tpl["group_header"].format(
                agg_label=_AGG_LABELS[agg], metric_label=METRIC_LABELS[metric].lower(),
                dim=dim, year=year)
            items = [
                tpl["group_row"].format(group_value=row[0],
                                        value=format_value(row[2], unit))
                for row in table.rows if row[1] == year
            ]
            parts.append(header + " " + "; ".join(items) + ".")
        return Answer(kind="metric", text=" ".join(parts), table=table,
                      boundary_note=note)

    sentences = []
    for row in table.rows:
        company, year = row[0], row[1]
        for offset, metric in enumerate(plan.metrics):
            value = row[2 + offset]
            unit = table.columns[2 + offset].unit
            sentences.append(_metric_sentence(tpl, company, metric, year,
                                              value, unit, plan.list_id))
    return Answer(kind="metric", text=" ".join(sentences), table=table,
                  boundary_note=note)


def render_persona(grammar: Grammar | None = None) -> Answer:
    grammar = grammar or default_grammar()
    return Answer(kind="persona", text=grammar.persona_text)


def render_trend(plan: QueryPlan, series: TrendSeries,
                 summary: TrendSummary | None,
                 grammar: Grammar | None = None) -> Answer:
    grammar = grammar or default_grammar()
    tpl = grammar.answer_templates
    topic = ", ".join(plan.topic_terms)
    if summary is not None:
        text = tpl["trend_caption"].format(
            topic=topic, scale=series.scale, direction=summary.direction,
            peak=summary.peak_bucket.isoformat())
    else:
        text = tpl["trend_caption_short"].format(topic=topic, scale=series.scale)
    return Answer(kind="trend", text=text, trend=series, trend_summary=summary)


def _latest_reference(dataset: Dataset, company: str, metric: str,
                      latest: int):
    value = lookup_metric(dataset, company, metric, latest)
    if isinstance(value, NotFound) and value.reason == "value_missing" \
            and value.latest_available is not None:
        value = lookup_metric(dataset, company, metric, value.latest_available)
    return value if isinstance(value, MetricValue) else None


def render_rejection(source, grammar: Grammar | None = None, *,
                     plan: QueryPlan | None = None,
                     dataset: Dataset | None = None) -> Answer:
    """Render a rejection from diagnostics, a boundary outcome, a guardrail
    verdict, or an execution error.

    Metric boundary rejections carry the latest available value as a
    designated reference row; safety rejections name categories but never
    echo the offending content.
    """
    grammar = grammar or default_grammar()
    tpl = grammar.answer_templates

    if isinstance(source, GuardrailVerdict):
        is_pii_only = source.categories == frozenset({"pii"})
        text = tpl["reject_pii"] if is_pii_only else tpl["reject_safety"]
        return Answer(kind="rejection", text=text,
                      safety={"decision": source.decision,
                              "categories": sorted(source.categories)})

    if isinstance(source, ParseDiagnostics):
        if source.kind == "out_of_domain":
            text = tpl["reject_out_of_domain"]
        elif source.kind == "unknown_entity":
            text = tpl["reject_unknown_entity"]
            if source.suggestions:
                text += " Did you mean: " + ", ".join(source.suggestions) + "?"
        else:
            text = tpl["reject_out_of_grammar"]
        return Answer(kind="rejection", text=text,
                      boundary_note=f"{source.kind}: {source.message}")

    if isinstance(source, ExecError):
        return Answer(kind="rejection", text=tpl["reject_exec"],
                      boundary_note=f"execution error ({source.kind}): {source.message}")

    if isinstance(source, BoundaryOutcome):
        latest = source.latest_available
        requested = ",".join(str(y) for y in plan.time.years) if plan else "?"
        note = tpl["reject_note"].format(requested=requested, latest=latest)
        sentences = []
        ref_columns = None
        ref_rows = []
        if plan is not None and dataset is not None and plan.metrics:
            metric = plan.metrics[0]
            for company in plan.companies:
                ref = _latest_reference(dataset, company, metric, latest)
                if ref is None:
                    continue
                sentences.append(tpl["reject_metric_year"].format(
                    company=company, metric_label=METRIC_LABELS[metric].lower(),
                    latest_year=ref.year, value=format_value(ref.value, ref.unit)))
                ref_rows.append((company, ref.year, ref.value))
            if ref_rows:
                from .metrics_store import METRIC_FIELDS, METRIC_UNITS
                ref_columns = (
                    Column("company", "categorical"),
                    Column("year", "temporal"),
                    Column(METRIC_FIELDS[metric], "quantitative", METRIC_UNITS[metric]),
                )
        if not sentences:
            sentences.append(tpl["reject_metric_year_no_value"])
        table = None
        if ref_columns:
            table = ResultTable(
                columns=ref_columns, rows=tuple(ref_rows),
                provenance={"plan": canonical_form(plan) if plan else None,
                            "dataset_fingerprint": dataset.load_fingerprint
                            if dataset else None,
                            "reference": "latest_available"},
            )
        return Answer(kind="rejection", text=" ".join(sentences), table=table,
                      boundary_note=note)

    raise TypeError(f"cannot render rejection from {type(source).__name__}")


# --- JSON form -----------------------------------------------------------------


def answer_to_dict(answer: Answer) -> dict:
    """Stable JSON-ready form consumed by the service and the web console."""
    from .plan_executor import chart_spec_to_dict, table_to_dict

    payload = None
    if any(x is not None for x in (answer.table, answer.chart_spec, answer.trend)):
        payload = {
            "table": table_to_dict(answer.table) if answer.table else None,
            "chart_spec": chart_spec_to_dict(answer.chart_spec)
            if answer.chart_spec else None,
            "trend": series_to_dict(answer.trend) if answer.trend else None,
            "trend_summary": {
                "direction": answer.trend_summary.direction,
                "peak_bucket": answer.trend_summary.peak_bucket.isoformat(),
                "pct_change_first_to_last": answer.trend_summary.pct_change_first_to_last,
            } if answer.trend_summary else None,
        }
    return {
        "kind": answer.kind,
        "text": answer.text,
        "boundary_note": answer.boundary_note,
        "safety": answer.safety,
        "payload": payload,
        "citations": list(answer.citations),
        "provenance": answer.provenance,
    }


def answer_to_json(answer: Answer) -> str:
    import json

    return json.dumps(answer_to_dict(answer), ensure_ascii=False,
                      separators=(",", ":"))


# --- digit audit (the no-free-floating-numbers invariant) ---------------------

_DIGITS_RE = re.compile(r"\d+")


def _value_digit_forms(value, unit: str | None) -> set:
    forms = set()
    if value is None:
        return forms
    forms.update(_DIGITS_RE.findall(str(value)))
    if unit and isinstance(value, (int, float)) and not isinstance(value, bool):
        forms.update(_DIGITS_RE.findall(format_value(value, unit)))
    return forms


def payload_digit_sequences(answer: Answer) -> set:
    """Digit sequences available in the answer payload (formatted or raw)."""
    available: set[str] = set()
    if answer.table is not None:
        for row in answer.table.rows:
            for cell, col in zip(row, answer.table.columns):
                available |= _value_digit_forms(cell, col.unit)
    if answer.chart_spec is not None:
        for row in answer.chart_spec.rows:
            for key, cell in row.items():
                available |= _value_digit_forms(cell, None)
                unit = answer.chart_spec.y.get("unit")
                available |= _value_digit_forms(cell, unit)
    if answer.trend is not None:
        for bucket in answer.trend.buckets:
            available.update(_DIGITS_RE.findall(bucket.bucket_start.isoformat()))
            available.update(_DIGITS_RE.findall(str(bucket.count)))
    return available


def text_digit_sequences(answer: Answer) -> set:
    # list display names ("Global 500") are catalog vocabulary, not values
    text = answer.text
    for display in KNOWN_LIST_NAMES.values():
        text = text.replace(display, " ")
    return set(_DIGITS_RE.findall(text))


def audit_numbers(answer: Answer) -> set:
    """Digit sequences in the text that are NOT backed by the payload
    (empty set means the invariant holds)."""
    return text_digit_sequences(answer) - payload_digit_sequences(answer)
