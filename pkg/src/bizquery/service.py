"""Stateless HTTP service: guardrails, planning, execution, rendering,
referencing, and NDJSON streaming.

All shared state (dataset, corpus index, lexicons) is an immutable
snapshot owned by the app; requests never mutate it, so any number of
concurrent requests see identical behavior to serial execution. Streamed
responses emit the answer text chunks (and the chart spec) before
reference retrieval begins; the references event always precedes done.

Response bodies are serialized with the engine's canonical JSON writers,
so equal answers are byte-identical.

Endpoints (all under /v1 except /health):
  POST /v1/query {query, ref_date?, stream?}
  GET  /v1/coverage
  GET  /v1/trends?topic=a,b&scale=year&from=2019&to=2024
  GET  /health
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .errors import ConfigError, EmptyRange
from .pipeline import EngineContext, add_references, build_context, plan_and_render
from .plan_executor import SandboxLimits, chart_spec_to_dict
from .responder import answer_to_dict, answer_to_json
from .trends import SCALES, series_to_dict, topic_series

ENV_PREFIX = "FALM_"
CHUNK_WORDS = 6


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: Path
    corpus_dir: Path | None
    port: int = 8080
    ref_date: date = date(2025, 6, 15)
    lexicon_path: Path | None = None
    weights: dict | None = None
    cite_threshold: float = 0.2
    max_citations: int = 3
    limits: SandboxLimits = SandboxLimits()


def load_config(path: str | Path | None) -> ServiceConfig:
    """Key/value config file plus FALM_* environment overrides."""
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        if not cp.read(path, encoding="utf-8"):
            raise ConfigError(f"config file not found: {path}")
    svc = cp["service"] if cp.has_section("service") else {}
    data_dir = os.environ.get(ENV_PREFIX + "DATA_DIR") or svc.get("data_dir")
    if not data_dir:
        raise ConfigError("data_dir is required (config [service] or FALM_DATA_DIR)")
    corpus_dir = os.environ.get(ENV_PREFIX + "CORPUS_DIR") or svc.get("corpus_dir")
    port = int(os.environ.get(ENV_PREFIX + "PORT") or svc.get("port", 8080))
    ref_raw = os.environ.get(ENV_PREFIX + "REF_DATE") or svc.get("ref_date")
    ref_date = date.fromisoformat(ref_raw) if ref_raw else date(2025, 6, 15)
    lexicons = svc.get("lexicons") if svc else None

    weights = None
    threshold, max_cit = 0.2, 3
    if cp.has_section("reference"):
        ref = cp["reference"]
        weights = {
            "w_bm25": ref.getfloat("w_bm25", 0.6),
            "w_title": ref.getfloat("w_title", 0.3),
            "w_recency": ref.getfloat("w_recency", 0.1),
        }
        threshold = ref.getfloat("threshold", 0.2)
        max_cit = ref.getint("max_citations", 3)
    limits = SandboxLimits()
    if cp.has_section("sandbox"):
        sb = cp["sandbox"]
        limits = SandboxLimits(
            max_rows_scanned=sb.getint("max_rows_scanned", 1_000_000),
            max_output_rows=sb.getint("max_output_rows", 10_000),
            wall_clock_budget_ms=sb.getint("wall_clock_budget_ms", 2_000),
        )
    for p in (data_dir,):
        if not Path(p).exists():
            raise ConfigError(f"data_dir does not exist: {p}")
    return ServiceConfig(
        data_dir=Path(data_dir),
        corpus_dir=Path(corpus_dir) if corpus_dir else None,
        port=port, ref_date=ref_date,
        lexicon_path=Path(lexicons) if lexicons else None,
        weights=weights, cite_threshold=threshold, max_citations=max_cit,
        limits=limits,
    )


def context_from_config(cfg: ServiceConfig) -> EngineContext:
    return build_context(
        cfg.data_dir, cfg.corpus_dir, cfg.ref_date,
        lexicon_path=cfg.lexicon_path, limits=cfg.limits,
        weights=cfg.weights, cite_threshold=cfg.cite_threshold,
        max_citations=cfg.max_citations,
    )


def _ndjson(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def _chunks(text: str):
    words = text.split(" ")
    for i in range(0, len(words), CHUNK_WORDS):
        piece = " ".join(words[i:i + CHUNK_WORDS])
        if i + CHUNK_WORDS < len(words):
            piece += " "
        yield piece


def create_app(ctx: EngineContext | None) -> FastAPI:
    """Build the app around an immutable engine context (None = still loading)."""
    app = FastAPI(title="bizquery", docs_url=None, redoc_url=None)
    app.state.ctx = ctx

    def _ctx() -> EngineContext | None:
        return app.state.ctx

    @app.get("/health")
    def health():
        ctx = _ctx()
        if ctx is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        return {
            "status": "ok",
            "dataset_fingerprint": ctx.dataset.load_fingerprint,
            "index_fingerprint": ctx.index.fingerprint if ctx.index else None,
        }

    @app.get("/v1/coverage")
    def coverage_summary():
        ctx = _ctx()
        if ctx is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        catalog = ctx.dataset.catalog
        return {
            "lists": {
                lid: {
                    "display_name": info.display_name,
                    "years": list(info.years),
                    "cutoff_year": info.years[-1],
                }
                for lid, info in sorted(catalog.lists.items())
            },
            "company_count": len(catalog.companies),
            "metrics": list(catalog.metrics),
            "dataset_fingerprint": ctx.dataset.load_fingerprint,
        }

    # `from` is a Python keyword, so the route reads raw query params.
    @app.get("/v1/trends")
    def trends_route(request: Request):
        ctx = _ctx()
        if ctx is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        if ctx.index is None:
            return JSONResponse({"error": "no corpus loaded"}, status_code=400)
        params = request.query_params
        topic = params.get("topic", "").strip()
        scale = params.get("scale", "year")
        raw_from, raw_to = params.get("from"), params.get("to")
        if not topic:
            return JSONResponse({"error": "topic is required"}, status_code=400)
        if scale not in SCALES:
            return JSONResponse({"error": f"scale must be one of {SCALES}"},
                                status_code=400)
        try:
            start = _parse_bound(raw_from, default=date(2015, 1, 1), end=False)
            end = _parse_bound(raw_to, default=ctx.ref_date, end=True)
        except ValueError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        terms = [t.strip() for t in topic.split(",") if t.strip()]
        try:
            series = topic_series(ctx.index, terms, scale, (start, end))
        except EmptyRange as exc:
            return JSONResponse({"error": f"empty range: {exc}"}, status_code=400)
        return series_to_dict(series)

    @app.post("/v1/query")
    async def query_endpoint(request: Request):
        ctx = _ctx()
        if ctx is None:
            return JSONResponse({"status": "loading"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body must be valid JSON"}, status_code=400)
        if not isinstance(body, dict) or not str(body.get("query", "")).strip():
            return JSONResponse({"error": "query is required"}, status_code=400)
        query = str(body["query"])
        ref_date = None
        if body.get("ref_date"):
            try:
                ref_date = date.fromisoformat(str(body["ref_date"]))
            except ValueError:
                return JSONResponse({"error": "ref_date must be YYYY-MM-DD"},
                                    status_code=400)
        stream = bool(body.get("stream", False))

        answer, gate_rejected = plan_and_render(query, ctx, ref_date)
        if gate_rejected:
            return Response(content=answer_to_json(answer), status_code=422,
                            media_type="application/json")
        if not stream:
            answer = add_references(answer, ctx)
            return Response(content=answer_to_json(answer),
                            media_type="application/json")

        def event_stream():
            # text first: the initial chunk must flush before any
            # reference retrieval happens
            for piece in _chunks(answer.text):
                yield _ndjson({"type": "chunk", "text": piece})
            if answer.chart_spec is not None:
                yield _ndjson({"type": "chart",
                               "spec": chart_spec_to_dict(answer.chart_spec)})
            final = add_references(answer, ctx)
            if final.kind not in ("persona", "rejection"):
                yield _ndjson({"type": "references",
                               "hits": list(final.citations)})
            yield _ndjson({"type": "done"})

        return StreamingResponse(event_stream(), media_type="application/x-ndjson")

    return app


def _parse_bound(raw: str | None, default: date, end: bool) -> date:
    if not raw:
        return default
    raw = raw.strip()
    if len(raw) == 4 and raw.isdigit():
        year = int(raw)
        return date(year, 12, 31) if end else date(year, 1, 1)
    return date.fromisoformat(raw)


def serve(config_path: str | Path | None):
    """CLI entry: load config, build the context, run uvicorn."""
    import uvicorn

    cfg = load_config(config_path)
    app = create_app(context_from_config(cfg))
    uvicorn.run(app, host="127.0.0.1", port=cfg.port, log_level="warning")
