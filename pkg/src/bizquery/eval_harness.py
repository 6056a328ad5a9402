"""Desk-scale evaluation harness: templated prompts, execution-rate and
data-match scoring, QA rubric suites, and the safety rejection report.

Prompt templates live in a JSON data file, authored independently of the
parser's keyword tables. The harness fills slots from the dataset
catalog, computes every expectation with the reference executor or an
explicit linear scan (never the production path under test), and scores:

* execution rate with the parse-error / runtime-error taxonomy,
* data match (axis fields, value multisets at 1e-9 relative tolerance,
  row counts), per chart type,
* Metric/Ranking QA rubrics (exact match, reject-with-latest reference,
  closest-year redirect, top-5/top-10 prefix equality),
* safety rejection rate with the non-rejected residue listed for review.

The original free-form user-survey prompt set is not reproducible; a
hand-authored paraphrase suite (three or more paraphrases per template)
substitutes for it, and reports say so in their ``limitations`` field.
"""

from __future__ import annotations

import json
import math
import random
import string
import time
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import EmptySuite, ExecError, TemplateError
from .guardrails import CategoryLexicon, gate_input
from .metrics_store import Dataset
from .oracle import oracle_chart_rows, oracle_execute
from .plan_executor import SandboxLimits, execute
from .query_frontend import (
    ParseDiagnostics,
    QueryPlan,
    canonical_form,
    default_grammar,
    parse_query,
)
from .temporal import BASIS_DEFAULTED, BASIS_EXPLICIT, BoundaryOutcome, ResolvedTime

DEFAULT_REF_DATE = date(2025, 6, 15)

LIST_DISPLAY = {"g500": "Global 500", "f1000": "Fortune 1000"}

VIZ_CLASSES = ("bar", "line", "scatter", "table")
QA_RUBRICS = ("exact_match", "reject_with_latest", "redirect_closest",
              "top5", "top10")

LIMITATION_NOTE = (
    "Prompts are drawn from a hand-authored template/paraphrase suite, "
    "not a field-collected free-form prompt distribution."
)


@dataclass(frozen=True)
class BenchmarkCase:
    case_id: str
    template_id: str
    cls: str  # bar | line | scatter | table | qa | trend | persona
    rubric: str | None
    prompt: str
    intended_plan: str
    plan: QueryPlan | None
    expected: dict


@dataclass
class EvalReport:
    suite: str
    n_cases: int
    seed: int
    parse_errors: int = 0
    runtime_errors: int = 0
    execution_rate: float | None = None
    data_match_rate: float | None = None
    axes_match_rate: float | None = None
    row_count_match_rate: float | None = None
    per_class: dict = field(default_factory=dict)
    qa_rubric_pass_rates: dict | None = None
    safety_rejection_rate: float | None = None
    safety_breakdown: dict | None = None
    non_rejected: list | None = None
    latency_ms: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    limitations: str = LIMITATION_NOTE

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "n_cases": self.n_cases,
            "seed": self.seed,
            "execution_rate": self.execution_rate,
            "error_taxonomy": {"parse_errors": self.parse_errors,
                               "runtime_errors": self.runtime_errors},
            "data_match_rate": self.data_match_rate,
            "axes_match_rate": self.axes_match_rate,
            "row_count_match_rate": self.row_count_match_rate,
            "per_class": self.per_class,
            "qa_rubric_pass_rates": self.qa_rubric_pass_rates,
            "safety_rejection_rate": self.safety_rejection_rate,
            "safety_breakdown": self.safety_breakdown,
            "non_rejected": self.non_rejected,
            "latency_ms": self.latency_ms,
            "failures": self.failures,
            "limitations": self.limitations,
        }


# --- template loading -----------------------------------------------------------

_KNOWN_SLOTS = {
    "metric", "metric_id", "m1", "m1_id", "m2", "m2_id",
    "c1", "c2", "c3", "companies", "year", "ya", "yb", "year0", "n", "k",
    "list", "list_name", "cutoff", "future_year", "ancient_year",
    "offcov_year", "redirect_target", "last_year",
    "since_years", "range_years", "lastn_years", "decade_years",
    "trend_years", "topic",
}


def _slots_in(text: str) -> set:
    return {name for _, name, _, _ in string.Formatter().parse(text) if name}


def load_templates(path: str | Path | None = None) -> dict:
    if path is None:
        path = str(resources.files("bizquery").joinpath("config/templates.json"))
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    for tpl in payload["templates"]:
        for text in (tpl["prompt"], tpl["plan"], *tpl.get("paraphrases", ())):
            unknown = _slots_in(text) - _KNOWN_SLOTS
            if unknown:
                raise TemplateError(
                    f"template {tpl['id']}: unknown slots {sorted(unknown)}")
    return payload


# --- slot sampling ----------------------------------------------------------------


def _years_str(years) -> str:
    ys = sorted(years)
    if len(ys) > 2 and ys == list(range(ys[0], ys[-1] + 1)):
        return f"{ys[0]}..{ys[-1]}"
    return ",".join(str(y) for y in ys)


def _companies_of(dataset: Dataset, lid: str) -> list[str]:
    return sorted(c for c, info in dataset.catalog.companies.items()
                  if lid in info.coverage)


def _mk_bound(years, cov_years) -> BoundaryOutcome:
    return BoundaryOutcome("in_range", tuple(sorted(years)), None, max(cov_years))


def _mk_time(years, basis=BASIS_EXPLICIT) -> ResolvedTime:
    return ResolvedTime(tuple(sorted(years)), basis)


def _metric_pick(rng: random.Random, phrases: dict, exclude: str | None = None):
    options = sorted(p for p, mid in phrases.items() if mid != exclude)
    phrase = rng.choice(options)
    return phrase, phrases[phrase]


class _Sampler:
    """Per-kind slot/plan construction against one dataset."""

    def __init__(self, dataset: Dataset, templates: dict, ref_date: date):
        self.dataset = dataset
        self.phrases = templates["metric_phrases"]
        self.topics = templates["topics"]
        self.ref_date = ref_date

    def _list_slots(self, rng, lid=None):
        catalog = self.dataset.catalog
        lid = lid or rng.choice(sorted(catalog.lists))
        years = catalog.lists[lid].years
        return lid, years

    def _chart_companies(self, rng, count, explicit_list=None):
        lid, years = self._list_slots(rng, explicit_list)
        names = sorted(rng.sample(_companies_of(self.dataset, lid), count))
        return lid, years, names

    def build(self, kind: str, rng: random.Random):
        fn = getattr(self, f"_k_{kind}", None)
        if fn is None:
            raise TemplateError(f"unknown template kind {kind!r}")
        return fn(rng)

    # chart recipes

    def _chart_plan(self, lid, years_sel, cov_years, names, metrics,
                    chart_type, top_k=None, group=None,
                    basis=BASIS_EXPLICIT):
        return QueryPlan(
            intent="chart", companies=tuple(names), list_id=lid,
            metrics=tuple(metrics), time=_mk_time(years_sel, basis),
            boundary=_mk_bound(years_sel, cov_years), chart_type=chart_type,
            top_k=top_k, group=group)

    def _bar_companies(self, rng, count):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, count)
        year = rng.choice(years)
        values = {"metric": metric, "metric_id": mid, "year": year,
                  "list": lid, "companies": ",".join(names)}
        for i, name in enumerate(names, start=1):
            values[f"c{i}"] = name
        plan = self._chart_plan(lid, (year,), years, names, (mid,), "bar")
        return values, plan, None

    def _k_chart_bar_companies3(self, rng):
        return self._bar_companies(rng, 3)

    def _k_chart_bar_companies2(self, rng):
        return self._bar_companies(rng, 2)

    def _k_chart_bar_company1(self, rng):
        return self._bar_companies(rng, 1)

    def _k_chart_bar_latest(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        cutoff = years[-1]
        values = {"metric": metric, "metric_id": mid, "list": lid,
                  "c1": names[0], "cutoff": cutoff}
        plan = self._chart_plan(lid, (cutoff,), years, names, (mid,), "bar",
                                basis=BASIS_DEFAULTED)
        return values, plan, None

    def _k_chart_bar_topk(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years = self._list_slots(rng)
        year = rng.choice(years)
        k = rng.randint(3, 10)
        values = {"metric": metric, "metric_id": mid, "year": year, "k": k,
                  "list": lid, "list_name": LIST_DISPLAY[lid]}
        plan = self._chart_plan(lid, (year,), years, (), (mid,), "bar", top_k=k)
        return values, plan, None

    def _k_chart_bar_group_sum(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years = self._list_slots(rng, "g500")
        year = rng.choice(years)
        values = {"metric": metric, "metric_id": mid, "year": year, "list": lid}
        plan = self._chart_plan(lid, (year,), years, (), (mid,), "bar",
                                group=("sector", "sum"))
        return values, plan, None

    def _k_chart_line_since3(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 3)
        year0 = rng.choice(years[:-2])
        span = tuple(range(year0, years[-1] + 1))
        values = {"metric": metric, "metric_id": mid, "year0": year0,
                  "list": lid, "companies": ",".join(names),
                  "since_years": _years_str(span)}
        for i, name in enumerate(names, start=1):
            values[f"c{i}"] = name
        plan = self._chart_plan(lid, span, years, names, (mid,), "line")
        return values, plan, None

    def _k_chart_line_range1(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        ya = rng.choice(years[:-2])
        yb = rng.choice([y for y in years if y > ya])
        span = tuple(range(ya, yb + 1))
        values = {"metric": metric, "metric_id": mid, "ya": ya, "yb": yb,
                  "list": lid, "c1": names[0], "range_years": _years_str(span)}
        plan = self._chart_plan(lid, span, years, names, (mid,), "line")
        return values, plan, None

    def _k_chart_line_lastn(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        n = rng.randint(2, 6)
        span = tuple(range(years[-1] - n + 1, years[-1] + 1))
        values = {"metric": metric, "metric_id": mid, "n": n, "list": lid,
                  "c1": names[0], "lastn_years": _years_str(span)}
        plan = self._chart_plan(lid, span, years, names, (mid,), "line")
        return values, plan, None

    def _k_chart_line_decade(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 2, "g500")
        span = tuple(range(years[-1] - 9, years[-1] + 1))
        values = {"metric": metric, "metric_id": mid, "list": lid,
                  "companies": ",".join(names), "c1": names[0], "c2": names[1],
                  "decade_years": _years_str(span)}
        plan = self._chart_plan(lid, span, years, names, (mid,), "line")
        return values, plan, None

    def _scatter(self, rng, with_year, companies=0):
        m1, m1_id = _metric_pick(rng, self.phrases)
        m2, m2_id = _metric_pick(rng, self.phrases, exclude=m1_id)
        if companies:
            lid, years, names = self._chart_companies(rng, companies)
        else:
            lid, years = self._list_slots(rng)
            names = []
        year = rng.choice(years) if with_year else years[-1]
        k = rng.randint(3, 10)
        values = {"m1": m1, "m1_id": m1_id, "m2": m2, "m2_id": m2_id,
                  "k": k, "list": lid, "list_name": LIST_DISPLAY[lid],
                  "year": year, "cutoff": years[-1],
                  "companies": ",".join(names)}
        for i, name in enumerate(names, start=1):
            values[f"c{i}"] = name
        basis = BASIS_EXPLICIT if with_year else BASIS_DEFAULTED
        plan = self._chart_plan(lid, (year,), years, names, (m1_id, m2_id),
                                "scatter", top_k=None if companies else k,
                                basis=basis)
        return values, plan, None

    def _k_chart_scatter_topk_latest(self, rng):
        return self._scatter(rng, with_year=False)

    def _k_chart_scatter_topk_year(self, rng):
        return self._scatter(rng, with_year=True)

    def _k_chart_scatter_companies3(self, rng):
        return self._scatter(rng, with_year=True, companies=3)

    # metric / group / ranking recipes

    def _metric_plan(self, lid, names, metrics, years_sel, cov_years,
                     group=None, top_k=None, intent="metric_qa",
                     boundary=None):
        return QueryPlan(
            intent=intent, companies=tuple(sorted(names)), list_id=lid,
            metrics=tuple(metrics), time=_mk_time(years_sel),
            boundary=boundary or _mk_bound(years_sel, cov_years),
            top_k=top_k, group=group)

    def _company_record_value(self, company, metric, year):
        """Independent line-scan of the stored records (not lookup_metric)."""
        target = company.casefold()
        for rec in self.dataset.records:
            spelled = " ".join(t.strip(".,") for t in rec.company.casefold().split())
            if spelled == target and rec.year == year:
                return rec.rank if metric == "rank" else getattr(rec, metric)
        return None

    def _k_metric_lookup(self, rng, metric_override=None):
        if metric_override:
            metric, mid = metric_override
        else:
            metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        year = rng.choice(years)
        value = self._company_record_value(names[0], mid, year)
        if value is None:
            raise _Resample()
        values = {"metric": metric, "metric_id": mid, "year": year,
                  "list": lid, "c1": names[0]}
        plan = self._metric_plan(lid, names, (mid,), (year,), years)
        expected = {"company": names[0], "metric": mid, "year": year,
                    "value": value}
        return values, plan, expected

    def _k_metric_employees(self, rng):
        return self._k_metric_lookup(rng, metric_override=("employees", "employees"))

    def _k_metric_rank(self, rng):
        return self._k_metric_lookup(rng, metric_override=("rank", "rank"))

    def _k_metric_companies2(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 2)
        year = rng.choice(years)
        values = {"metric": metric, "metric_id": mid, "year": year,
                  "list": lid, "companies": ",".join(names),
                  "c1": names[0], "c2": names[1]}
        plan = self._metric_plan(lid, names, (mid,), (year,), years)
        return values, plan, None

    def _k_metric_two_metrics(self, rng):
        m1, m1_id = _metric_pick(rng, self.phrases)
        m2, m2_id = _metric_pick(rng, self.phrases, exclude=m1_id)
        lid, years, names = self._chart_companies(rng, 1)
        year = rng.choice(years)
        values = {"m1": m1, "m1_id": m1_id, "m2": m2, "m2_id": m2_id,
                  "year": year, "list": lid, "c1": names[0]}
        plan = self._metric_plan(lid, names, (m1_id, m2_id), (year,), years)
        return values, plan, None

    def _group(self, rng, dim, agg):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years = self._list_slots(rng, "g500")
        year = rng.choice(years)
        metrics = ("revenue",) if agg == "count" else (mid,)
        values = {"metric": metric, "metric_id": mid, "year": year, "list": lid,
                  "list_name": LIST_DISPLAY[lid]}
        plan = self._metric_plan(lid, (), metrics, (year,), years,
                                 group=(dim, agg))
        return values, plan, None

    def _k_group_sector_sum(self, rng):
        return self._group(rng, "sector", "sum")

    def _k_group_country_avg(self, rng):
        return self._group(rng, "country", "avg")

    def _k_group_country_count(self, rng):
        lid, years = self._list_slots(rng)
        year = rng.choice(years)
        values = {"year": year, "list": lid, "list_name": LIST_DISPLAY[lid]}
        plan = self._metric_plan(lid, (), ("revenue",), (year,), years,
                                 group=("country", "count"))
        return values, plan, None

    def _top_companies(self, lid, metric, year, k):
        """Independent ranking scan for rubric expectations."""
        scored = []
        for rec in self.dataset.records:
            if rec.list_id != lid or rec.year != year:
                continue
            value = rec.rank if metric == "rank" else getattr(rec, metric)
            if value is None:
                continue
            scored.append((value, rec.rank, rec.company))
        scored.sort(key=lambda t: (t[0] if metric == "rank" else -t[0], t[1], t[2]))
        out = []
        for _, _, spelled in scored[:k]:
            key = " ".join(t.strip(".,") for t in spelled.casefold().split())
            for canonical in self.dataset.catalog.companies:
                ck = " ".join(t.strip(".,") for t in canonical.casefold().split())
                if ck == key:
                    out.append(canonical)
                    break
        return out

    def _ranking(self, rng, k, fixed_metric=None):
        if fixed_metric:
            metric, mid = fixed_metric
        else:
            metric, mid = _metric_pick(rng, self.phrases)
        lid, years = self._list_slots(rng)
        year = rng.choice(years)
        values = {"metric": metric, "metric_id": mid, "year": year, "k": k,
                  "list": lid, "list_name": LIST_DISPLAY[lid]}
        plan = self._metric_plan(lid, (), (mid,), (year,), years,
                                 top_k=k, intent="ranking_qa")
        expected = {"companies": self._top_companies(lid, mid, year, k),
                    "year": year, "k": k}
        return values, plan, expected

    def _k_ranking_top5(self, rng):
        return self._ranking(rng, 5)

    def _k_ranking_top10(self, rng):
        return self._ranking(rng, 10)

    def _k_ranking_default(self, rng):
        return self._ranking(rng, 10, fixed_metric=("revenue", "revenue"))

    def _k_ranking_topk(self, rng):
        return self._ranking(rng, rng.randint(3, 10))

    # rubric recipes (rejections / redirects / relative time)

    def _k_metric_reject_future(self, rng):
        return self._reject(rng, future=True)

    def _k_metric_reject_old(self, rng):
        return self._reject(rng, future=False)

    def _reject(self, rng, future: bool):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        cutoff = years[-1]
        if future:
            year = rng.randint(cutoff + 1, cutoff + 4)
        else:
            year = rng.randint(years[0] - 6, years[0] - 1)
        reference = self._company_record_value(names[0], mid, cutoff)
        if reference is None:
            raise _Resample()
        values = {"metric": metric, "metric_id": mid, "list": lid,
                  "c1": names[0], "future_year": year, "ancient_year": year}
        boundary = BoundaryOutcome("reject", (), None, cutoff)
        plan = self._metric_plan(lid, names, (mid,), (year,), years,
                                 boundary=boundary)
        expected = {"company": names[0], "metric": mid, "latest": cutoff,
                    "value": reference}
        return values, plan, expected

    def _k_ranking_redirect(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years = self._list_slots(rng, "g500")
        if rng.random() < 0.5:
            year = rng.randint(years[0] - 5, years[0] - 1)
        else:
            year = rng.randint(years[-1] + 1, years[-1] + 4)
        # closest available year, ties to the more recent (explicit scan)
        target, best = None, None
        for candidate in years:
            dist = abs(candidate - year)
            if best is None or dist < best or (dist == best and candidate > target):
                target, best = candidate, dist
        k = rng.randint(3, 10)
        values = {"metric": metric, "metric_id": mid, "offcov_year": year,
                  "k": k, "list": lid, "redirect_target": target}
        boundary = BoundaryOutcome("redirect", (target,), target, years[-1])
        plan = QueryPlan(intent="ranking_qa", companies=(), list_id=lid,
                         metrics=(mid,), time=_mk_time((year,)),
                         boundary=boundary, top_k=k)
        expected = {"target": target, "k": k, "metric": mid,
                    "companies": self._top_companies(lid, mid, target, k)}
        return values, plan, expected

    def _k_metric_last_year(self, rng):
        metric, mid = _metric_pick(rng, self.phrases)
        lid, years, names = self._chart_companies(rng, 1)
        year = self.ref_date.year - 1
        if year not in years:
            raise _Resample()
        value = self._company_record_value(names[0], mid, year)
        if value is None:
            raise _Resample()
        values = {"metric": metric, "metric_id": mid, "list": lid,
                  "c1": names[0], "last_year": year}
        plan = self._metric_plan(lid, names, (mid,), (year,), years)
        expected = {"company": names[0], "metric": mid, "year": year,
                    "value": value}
        return values, plan, expected

    # trend / persona

    def _k_trend_lastn(self, rng):
        topic = rng.choice(self.topics)
        n = rng.randint(3, 8)
        years = tuple(range(self.ref_date.year - n + 1, self.ref_date.year + 1))
        values = {"topic": topic, "n": n, "trend_years": _years_str(years)}
        plan = QueryPlan(intent="trend", companies=(), list_id="", metrics=(),
                         time=_mk_time(years),
                         boundary=_mk_bound(years, years),
                         chart_type="year", topic_terms=(topic,))
        return values, plan, None

    def _trend_range(self, rng, scale):
        topic = rng.choice(self.topics)
        ya = rng.randint(2016, 2022)
        yb = rng.randint(ya + 1, 2024)
        years = tuple(range(ya, yb + 1))
        values = {"topic": topic, "ya": ya, "yb": yb,
                  "range_years": _years_str(years)}
        plan = QueryPlan(intent="trend", companies=(), list_id="", metrics=(),
                         time=_mk_time(years),
                         boundary=_mk_bound(years, years),
                         chart_type=scale, topic_terms=(topic,))
        return values, plan, None

    def _k_trend_range(self, rng):
        return self._trend_range(rng, "year")

    def _k_trend_monthly(self, rng):
        return self._trend_range(rng, "month")

    def _k_persona(self, rng):
        return {}, None, None


class _Resample(Exception):
    """Internal: the sampled slots have no usable data; try again."""


# --- case generation -------------------------------------------------------------


def gen_templated_prompts(templates_file, dataset: Dataset, seed: int, n: int,
                          suite: str = "viz",
                          ref_date: date = DEFAULT_REF_DATE) -> list[BenchmarkCase]:
    """Deterministically expand templates into n benchmark cases.

    suite="viz" uses the executable chart/table templates; suite="qa" the
    rubric-tagged ones; suite="all" every template (including trend and
    persona, which only exercise the parser).
    """
    payload = load_templates(templates_file)
    if suite == "viz":
        templates = [t for t in payload["templates"] if t["class"] in VIZ_CLASSES]
    elif suite == "qa":
        templates = [t for t in payload["templates"] if t.get("rubric")]
    elif suite == "all":
        templates = list(payload["templates"])
    else:
        raise ValueError(f"unknown suite {suite!r}")
    if not templates:
        raise TemplateError(f"no templates for suite {suite!r}")

    rng = random.Random(seed)
    sampler = _Sampler(dataset, payload, ref_date)
    cases: list[BenchmarkCase] = []
    for i in range(n):
        tpl = templates[i % len(templates)]
        for _attempt in range(50):
            try:
                values, plan, expected = sampler.build(tpl["kind"], rng)
            except _Resample:
                continue
            try:
                prompt_tpl = rng.choice([tpl["prompt"], *tpl.get("paraphrases", ())])
                prompt = prompt_tpl.format(**values)
                intended = tpl["plan"].format(**values)
            except KeyError as exc:
                raise TemplateError(
                    f"template {tpl['id']}: missing slot value {exc}") from None
            if plan is not None:
                rendered = canonical_form(plan)
                if rendered != intended:
                    raise TemplateError(
                        f"template {tpl['id']}: authored plan {intended!r} "
                        f"!= constructed {rendered!r}")
            if tpl["class"] in VIZ_CLASSES and tpl.get("rubric") is None:
                try:
                    expected = _viz_expectation(plan, dataset)
                except ExecError:
                    continue  # resample slots with no usable data
            elif tpl["class"] in VIZ_CLASSES and tpl.get("rubric"):
                try:
                    viz_exp = _viz_expectation(plan, dataset)
                except ExecError:
                    continue
                expected = {**(expected or {}), **viz_exp}
            cases.append(BenchmarkCase(
                case_id=f"{suite}-{seed}-{i:04d}",
                template_id=tpl["id"],
                cls=tpl["class"],
                rubric=tpl.get("rubric"),
                prompt=prompt,
                intended_plan=intended,
                plan=plan,
                expected=expected or {},
            ))
            break
        else:
            raise TemplateError(f"template {tpl['id']}: could not sample usable slots")
    return cases


def _viz_expectation(plan: QueryPlan, dataset: Dataset) -> dict:
    table = oracle_execute(plan, dataset)
    expected = {
        "columns": [c.name for c in table.columns],
        "rows": [list(r) for r in table.rows],
        "row_count": len(table.rows),
    }
    if plan.intent == "chart":
        chart_rows = oracle_chart_rows(table, plan)
        if not chart_rows:
            raise ExecError("empty", "no plottable rows")
        if plan.group is not None:
            x_field = plan.group[0]
            y_field = expected["columns"][2]
        elif plan.chart_type == "bar":
            x_field, y_field = "company", expected["columns"][3]
        elif plan.chart_type == "line":
            x_field, y_field = "year", expected["columns"][3]
        else:
            x_field, y_field = expected["columns"][3], expected["columns"][4]
        expected.update({
            "chart_x": x_field,
            "chart_y": y_field,
            "chart_rows": chart_rows,
            "chart_row_count": len(chart_rows),
        })
    return expected


# --- scoring ----------------------------------------------------------------------


def _numeric_cells(rows):
    values = []
    none_count = 0
    for row in rows:
        cells = row.values() if isinstance(row, dict) else row
        for cell in cells:
            if cell is None:
                none_count += 1
            elif isinstance(cell, (int, float)) and not isinstance(cell, bool):
                values.append(float(cell))
    return sorted(values), none_count


def _multiset_close(a, b, rel=1e-9) -> bool:
    va, na = _numeric_cells(a)
    vb, nb = _numeric_cells(b)
    if na != nb or len(va) != len(vb):
        return False
    return all(math.isclose(x, y, rel_tol=rel, abs_tol=1e-12)
               for x, y in zip(va, vb))


def _percentiles(samples_ms: list[float]) -> dict:
    if not samples_ms:
        return {"p50": None, "p95": None}
    arr = np.asarray(samples_ms)
    return {"p50": float(np.percentile(arr, 50)),
            "p95": float(np.percentile(arr, 95))}


def run_viz_eval(cases: list[BenchmarkCase], dataset: Dataset,
                 limits: SandboxLimits = SandboxLimits(),
                 ref_date: date = DEFAULT_REF_DATE) -> EvalReport:
    """Parse + execute every case; score execution rate and data match."""
    grammar = default_grammar()
    report = EvalReport(suite="viz", n_cases=len(cases), seed=0)
    per_class: dict[str, dict] = {}
    latencies: dict[str, list] = {}
    axes_ok = rows_ok = matched = 0
    for case in cases:
        cls = per_class.setdefault(case.cls, {"cases": 0, "executed": 0,
                                              "data_matched": 0})
        cls["cases"] += 1
        t0 = time.perf_counter()
        parsed = parse_query(case.prompt, dataset.catalog, ref_date, grammar)
        if isinstance(parsed, ParseDiagnostics):
            report.parse_errors += 1
            report.failures.append({
                "case_id": case.case_id, "template_id": case.template_id,
                "stage": "parse", "detail": parsed.message,
                "plan": None, "intended_plan": case.intended_plan,
                "prompt": case.prompt,
            })
            continue
        rendered = canonical_form(parsed)
        if rendered != case.intended_plan:
            report.parse_errors += 1
            report.failures.append({
                "case_id": case.case_id, "template_id": case.template_id,
                "stage": "plan_mismatch", "detail": rendered,
                "plan": rendered, "intended_plan": case.intended_plan,
                "prompt": case.prompt,
            })
            continue
        try:
            result = execute(parsed, dataset, limits)
        except ExecError as exc:
            report.runtime_errors += 1
            report.failures.append({
                "case_id": case.case_id, "template_id": case.template_id,
                "stage": "runtime", "detail": str(exc),
                "plan": rendered, "intended_plan": case.intended_plan,
                "prompt": case.prompt,
            })
            continue
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        latencies.setdefault(case.cls, []).append(elapsed_ms)
        cls["executed"] += 1

        expected = case.expected
        if case.plan is not None and case.plan.intent == "chart":
            spec = result.chart_spec
            a_ok = (spec.x["field"] == expected["chart_x"]
                    and spec.y["field"] == expected["chart_y"])
            r_ok = len(spec.rows) == expected["chart_row_count"]
            v_ok = _multiset_close(spec.rows, expected["chart_rows"])
        else:
            a_ok = [c.name for c in result.table.columns] == expected["columns"]
            r_ok = len(result.table.rows) == expected["row_count"]
            v_ok = _multiset_close(result.table.rows, expected["rows"])
        axes_ok += a_ok
        rows_ok += r_ok
        if a_ok and r_ok and v_ok:
            matched += 1
            cls["data_matched"] += 1
        else:
            report.failures.append({
                "case_id": case.case_id, "template_id": case.template_id,
                "stage": "data_match",
                "detail": f"axes={a_ok} rows={r_ok} values={v_ok}",
                "plan": rendered, "intended_plan": case.intended_plan,
                "prompt": case.prompt,
            })

    n = len(cases) or 1
    report.execution_rate = (len(cases) - report.parse_errors
                             - report.runtime_errors) / n
    report.data_match_rate = matched / n
    report.axes_match_rate = axes_ok / n
    report.row_count_match_rate = rows_ok / n
    report.per_class = per_class
    report.latency_ms = {cls: _percentiles(ms) for cls, ms in sorted(latencies.items())}
    return report


def run_qa_eval(cases: list[BenchmarkCase], ctx) -> EvalReport:
    """Score rubric-tagged cases through the full pipeline."""
    from .pipeline import run_query

    report = EvalReport(suite="qa", n_cases=len(cases), seed=0)
    totals: dict[str, list] = {}
    latencies: dict[str, list] = {}
    for case in cases:
        t0 = time.perf_counter()
        answer, _ = run_query(case.prompt, ctx)
        latencies.setdefault(case.rubric, []).append(
            (time.perf_counter() - t0) * 1000.0)
        ok = _check_rubric(case, answer)
        totals.setdefault(case.rubric, []).append(ok)
        if not ok:
            report.failures.append({
                "case_id": case.case_id, "template_id": case.template_id,
                "stage": case.rubric, "detail": answer.text[:160],
                "plan": answer.provenance.get("plan") if answer.provenance else None,
                "intended_plan": case.intended_plan,
                "prompt": case.prompt,
            })
    report.qa_rubric_pass_rates = {
        rubric: sum(oks) / len(oks) for rubric, oks in sorted(totals.items())
    }
    report.latency_ms = {r: _percentiles(ms) for r, ms in sorted(latencies.items())}
    return report


def _check_rubric(case: BenchmarkCase, answer) -> bool:
    expected = case.expected
    rubric = case.rubric
    if rubric == "exact_match":
        if answer.kind != "metric" or answer.table is None:
            return False
        for row in answer.table.rows:
            if row[0] == expected["company"] and row[1] == expected["year"]:
                return row[2] == expected["value"]
        return False
    if rubric == "reject_with_latest":
        if answer.kind != "rejection" or answer.table is None:
            return False
        rows = [r for r in answer.table.rows if r[1] == expected["latest"]]
        return bool(rows) and rows[0][2] == expected["value"] \
            and rows[0][0] == expected["company"]
    if rubric == "redirect_closest":
        if answer.kind != "ranking" or answer.table is None:
            return False
        years = {r[0] for r in answer.table.rows}
        note_ok = (answer.boundary_note is not None
                   and str(expected["target"]) in answer.boundary_note)
        return years == {expected["target"]} and note_ok
    if rubric in ("top5", "top10"):
        if answer.kind != "ranking" or answer.table is None:
            return False
        got = [r[2] for r in sorted(answer.table.rows, key=lambda r: r[1])]
        return got == expected["companies"]
    raise ValueError(f"unknown rubric {rubric!r}")


def run_safety_eval(prompts: list[dict], lexicons: CategoryLexicon) -> EvalReport:
    """Rejection rate over a prompt suite; non-rejected prompts are listed
    for manual review."""
    if not prompts:
        raise EmptySuite("safety suite has no prompts")
    rejected = 0
    breakdown: dict[str, dict] = {}
    non_rejected = []
    for entry in prompts:
        prompt = entry["prompt"] if isinstance(entry, dict) else entry
        expected = entry.get("categories", []) if isinstance(entry, dict) else []
        verdict = gate_input(prompt, lexicons)
        is_rejected = verdict.decision == "reject_input"
        rejected += is_rejected
        for category in expected or ["unlabelled"]:
            slot = breakdown.setdefault(category, {"total": 0, "rejected": 0})
            slot["total"] += 1
            slot["rejected"] += is_rejected
        if not is_rejected:
            non_rejected.append(prompt)
    report = EvalReport(suite="safety", n_cases=len(prompts), seed=0)
    report.safety_rejection_rate = rejected / len(prompts)
    report.safety_breakdown = dict(sorted(breakdown.items()))
    report.non_rejected = non_rejected
    return report
