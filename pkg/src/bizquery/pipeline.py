"""End-to-end query pipeline shared by the HTTP service and the CLI.

Stage order is a hard contract: input guardrail, parse, boundary check,
sandboxed execution, rendering, output guardrail, then content
referencing. Guardrail-rejected inputs never reach the parser or the
executor, and the first streamed text chunk is available before any
reference retrieval starts (referencing is a separate stage on purpose).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from .errors import ExecError
from .guardrails import CategoryLexicon, gate_input, gate_output, load_lexicons, redact
from .metrics_store import Dataset, ingest_files
from .plan_executor import SandboxLimits, execute
from .query_frontend import Grammar, ParseDiagnostics, QueryPlan, canonical_form, default_grammar
from .reference_engine import (
    DEFAULT_CITE_THRESHOLD,
    DEFAULT_MAX_CITATIONS,
    CorpusIndex,
    attach_references,
    index_corpus,
    parse_corpus_jsonl,
    rerank,
    retrieve,
)
from .responder import (
    Answer,
    render_answer,
    render_persona,
    render_rejection,
    render_trend,
)
from .trends import summarize_trend, topic_series
from .errors import TooFewBuckets


@dataclass(frozen=True)
class EngineContext:
    """Immutable snapshot of everything a request needs."""

    dataset: Dataset
    index: CorpusIndex | None
    lexicons: CategoryLexicon
    grammar: Grammar
    ref_date: date
    limits: SandboxLimits = SandboxLimits()
    weights: dict | None = None
    cite_threshold: float = DEFAULT_CITE_THRESHOLD
    max_citations: int = DEFAULT_MAX_CITATIONS


def build_context(data_dir: str | Path, corpus_path: str | Path | None,
                  ref_date: date, lexicon_path=None,
                  limits: SandboxLimits = SandboxLimits(),
                  weights: dict | None = None,
                  cite_threshold: float = DEFAULT_CITE_THRESHOLD,
                  max_citations: int = DEFAULT_MAX_CITATIONS) -> EngineContext:
    """Load CSV data files, the article corpus, and the lexicons."""
    data_dir = Path(data_dir)
    files = sorted(data_dir.glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no CSV files under {data_dir}")
    dataset = ingest_files([(f.name, f.read_bytes()) for f in files])
    index = None
    if corpus_path is not None:
        corpus_path = Path(corpus_path)
        if corpus_path.is_dir():
            corpus_path = corpus_path / "articles.jsonl"
        docs = parse_corpus_jsonl(corpus_path.read_text(encoding="utf-8"))
        index = index_corpus(docs)
    lexicons = load_lexicons(lexicon_path)
    return EngineContext(dataset=dataset, index=index, lexicons=lexicons,
                         grammar=default_grammar(), ref_date=ref_date,
                         limits=limits, weights=weights,
                         cite_threshold=cite_threshold,
                         max_citations=max_citations)


def _provenanced(answer: Answer, ctx: EngineContext,
                 plan: QueryPlan | None) -> Answer:
    return replace(answer, provenance={
        "plan": canonical_form(plan) if plan is not None else None,
        "dataset_fingerprint": ctx.dataset.load_fingerprint,
        "index_fingerprint": ctx.index.fingerprint if ctx.index else None,
        "ref_date": ctx.ref_date.isoformat(),
    })


def plan_and_render(text: str, ctx: EngineContext,
                    ref_date: date | None = None) -> tuple[Answer, bool]:
    """Everything up to (and including) the output gate; no references yet.

    Returns (answer, guardrail_rejected). The flag marks input-gate
    rejections, which the service maps to HTTP 422.
    """
    ref_date = ref_date or ctx.ref_date
    verdict = gate_input(text, ctx.lexicons)
    if verdict.decision == "reject_input":
        answer = render_rejection(verdict, ctx.grammar)
        return _provenanced(answer, ctx, None), True

    parsed = parse_query(text, ctx, ref_date)
    if isinstance(parsed, ParseDiagnostics):
        return _provenanced(render_rejection(parsed, ctx.grammar), ctx, None), False
    plan = parsed

    if plan.boundary.kind == "reject":
        answer = render_rejection(plan.boundary, ctx.grammar, plan=plan,
                                  dataset=ctx.dataset)
        return _provenanced(answer, ctx, plan), False

    if plan.intent == "persona":
        return _provenanced(render_persona(ctx.grammar), ctx, plan), False

    if plan.intent == "trend":
        answer = _run_trend(plan, ctx)
        return _provenanced(answer, ctx, plan), False

    try:
        result = execute(plan, ctx.dataset, ctx.limits)
    except ExecError as exc:
        answer = render_rejection(exc, ctx.grammar)
        return _provenanced(answer, ctx, plan), False

    answer = render_answer(plan, result, ctx.grammar)
    answer = _apply_output_gate(answer, ctx)
    return _provenanced(answer, ctx, plan), False


def parse_query(text: str, ctx: EngineContext, ref_date: date):
    from . import query_frontend

    return query_frontend.parse_query(text, ctx.dataset.catalog, ref_date,
                                      ctx.grammar)


def _run_trend(plan: QueryPlan, ctx: EngineContext) -> Answer:
    if ctx.index is None:
        return render_rejection(
            ParseDiagnostics(kind="out_of_grammar",
                             message="No article corpus is loaded for trend queries."),
            ctx.grammar)
    years = plan.time.years
    scale = plan.chart_type or "year"
    series = topic_series(
        ctx.index, list(plan.topic_terms), scale,
        (date(years[0], 1, 1), date(years[-1], 12, 31)),
    )
    try:
        summary = summarize_trend(series)
    except TooFewBuckets:
        summary = None
    return render_trend(plan, series, summary, ctx.grammar)


def _apply_output_gate(answer: Answer, ctx: EngineContext) -> Answer:
    verdict = gate_output(answer.text, ctx.lexicons)
    if verdict.decision == "block_output":
        return render_rejection(verdict, ctx.grammar)
    if verdict.decision == "redact_output":
        return replace(answer, text=redact(answer.text, verdict.spans))
    return answer


def add_references(answer: Answer, ctx: EngineContext) -> Answer:
    """Reference stage: retrieval over the answer text, re-rank, attach.

    Persona answers stay citation-free by policy; rejections carry no
    citations either (there is no claim to support).
    """
    if ctx.index is None or answer.kind in ("persona", "rejection"):
        return answer
    hits = retrieve(ctx.index, answer.text)
    if hits:
        hits = rerank(hits, answer.text, ctx.ref_date, ctx.index, ctx.weights)
    return attach_references(answer, hits, ctx.index,
                             threshold=ctx.cite_threshold,
                             max_citations=ctx.max_citations)


def run_query(text: str, ctx: EngineContext,
              ref_date: date | None = None) -> tuple[Answer, bool]:
    """Full pipeline: plan, render, gate, and attach references."""
    answer, rejected = plan_and_render(text, ctx, ref_date)
    if not rejected:
        answer = add_references(answer, ctx)
    return answer, rejected
