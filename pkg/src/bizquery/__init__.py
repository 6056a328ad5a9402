"""bizquery: a deterministic business-analytics query engine.

Boundary-checked metric and ranking QA over ranking-list data, chart-spec
compilation, answer-grounded article referencing, topic trend series,
input/output guardrails, and a streaming HTTP service, plus the
evaluation harness that scores all of it on seeded fixtures.
"""

from .metrics_store import (
    CompanyRecord,
    Dataset,
    MetricsCatalog,
    MetricValue,
    NoMatch,
    NotFound,
    ResolvedName,
    YearCoverage,
    coverage,
    ingest_csv,
    ingest_files,
    lookup_metric,
    resolve_company,
    serialize_csv,
)
from .temporal import (
    BoundaryOutcome,
    ResolvedTime,
    TemporalExpr,
    clamp_to_coverage,
    parse_temporal,
    resolve,
)
from .query_frontend import (
    ParseDiagnostics,
    QueryPlan,
    canonical_form,
    classify_intent,
    parse_query,
)
from .plan_executor import (
    ChartSpec,
    ExecutionResult,
    ResultTable,
    SandboxLimits,
    emit_chart_spec,
    execute,
)
from .oracle import oracle_execute
from .responder import Answer, render_answer, render_rejection
from .reference_engine import (
    ArticleDoc,
    CorpusIndex,
    ReferenceHit,
    attach_references,
    index_corpus,
    rerank,
    retrieve,
)
from .trends import TrendSeries, TrendSummary, summarize_trend, topic_series
from .guardrails import (
    GuardrailVerdict,
    PiiSpan,
    classify_harmful,
    gate_input,
    gate_output,
    load_lexicons,
    scan_pii,
)
from .pipeline import EngineContext, build_context, run_query
from .eval_harness import (
    BenchmarkCase,
    EvalReport,
    gen_templated_prompts,
    run_qa_eval,
    run_safety_eval,
    run_viz_eval,
)

__version__ = "0.1.0"
