"""Command-line interface.

Subcommands:
  query          run one query against local data, print the answer
  serve          start the HTTP service
  eval           run the viz / qa / safety evaluation suites
  trends         print a topic trend series as JSON
  scan           corpus guardrail scan (flags docs with PII/harmful hits)
  make-fixtures  write the seeded synthetic fixture tree
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import date
from pathlib import Path

from .errors import QueryEngineError
from .eval_harness import (
    DEFAULT_REF_DATE,
    gen_templated_prompts,
    run_qa_eval,
    run_safety_eval,
    run_viz_eval,
)
from .fixtures import write_fixture_tree
from .guardrails import load_lexicons, scan_corpus_docs
from .pipeline import build_context, run_query
from .reference_engine import parse_corpus_jsonl
from .responder import answer_to_dict
from .trends import SCALES, series_to_dict, topic_series


def _add_data_args(p: argparse.ArgumentParser, corpus_default=None):
    p.add_argument("--data", required=True, help="directory of ranking CSV files")
    p.add_argument("--corpus", default=corpus_default,
                   help="articles.jsonl file or its directory")
    p.add_argument("--ref-date", default=DEFAULT_REF_DATE.isoformat(),
                   help="reference date for relative time (YYYY-MM-DD)")
    p.add_argument("--lexicons", default=None, help="guardrail lexicon file")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bizquery")
    sub = parser.add_subparsers(dest="command", required=True)

    p_query = sub.add_parser("query", help="answer a single query")
    p_query.add_argument("text")
    _add_data_args(p_query)
    p_query.add_argument("--emit", choices=("answer", "chart-spec", "plan", "text"),
                         default="text")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", default=None, help="service config file")

    p_eval = sub.add_parser("eval", help="run an evaluation suite")
    p_eval.add_argument("suite", choices=("viz", "qa", "safety"))
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--corpus", default=None)
    p_eval.add_argument("--templates", default=None)
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--n", type=int, default=500)
    p_eval.add_argument("--suite-file", default=None,
                        help="safety: JSONL prompt suite")
    p_eval.add_argument("--out", default=None, help="write report JSON here")
    p_eval.add_argument("--ref-date", default=DEFAULT_REF_DATE.isoformat())
    p_eval.add_argument("--lexicons", default=None)

    p_trends = sub.add_parser("trends", help="topic trend series")
    p_trends.add_argument("--topic", required=True,
                          help="comma-separated topic terms")
    p_trends.add_argument("--scale", choices=SCALES, default="year")
    p_trends.add_argument("--from", dest="date_from", default="2015")
    p_trends.add_argument("--to", dest="date_to", default="2024")
    p_trends.add_argument("--corpus", required=True)

    p_scan = sub.add_parser("scan", help="corpus guardrail scan")
    p_scan.add_argument("--corpus", required=True)
    p_scan.add_argument("--lexicons", default=None)

    p_fix = sub.add_parser("make-fixtures", help="write synthetic fixtures")
    p_fix.add_argument("--out", required=True)
    p_fix.add_argument("--seed", type=int, default=42)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except QueryEngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _corpus_file(raw: str | None) -> Path | None:
    if raw is None:
        return None
    path = Path(raw)
    return path / "articles.jsonl" if path.is_dir() else path


def _parse_year_or_date(raw: str, end: bool) -> date:
    raw = raw.strip()
    if len(raw) == 4 and raw.isdigit():
        return date(int(raw), 12, 31) if end else date(int(raw), 1, 1)
    return date.fromisoformat(raw)


def _dispatch(args) -> int:
    if args.command == "make-fixtures":
        paths = write_fixture_tree(args.out, args.seed)
        for name, path in sorted(paths.items()):
            print(f"{name}\t{path}")
        return 0

    if args.command == "serve":
        from .service import serve

        serve(args.config)
        return 0

    if args.command == "trends":
        docs = parse_corpus_jsonl(_corpus_file(args.corpus).read_text(encoding="utf-8"))
        from .reference_engine import index_corpus

        index = index_corpus(docs)
        series = topic_series(
            index, [t.strip() for t in args.topic.split(",") if t.strip()],
            args.scale,
            (_parse_year_or_date(args.date_from, end=False),
             _parse_year_or_date(args.date_to, end=True)),
        )
        print(json.dumps(series_to_dict(series), indent=2))
        return 0

    if args.command == "scan":
        docs = parse_corpus_jsonl(_corpus_file(args.corpus).read_text(encoding="utf-8"))
        lexicons = load_lexicons(args.lexicons)
        flags = scan_corpus_docs(docs, lexicons)
        print(json.dumps({"flagged": flags, "scanned": len(docs)}, indent=2))
        return 0

    if args.command == "query":
        ctx = build_context(args.data, _corpus_file(args.corpus),
                            date.fromisoformat(args.ref_date),
                            lexicon_path=args.lexicons)
        answer, rejected = run_query(args.text, ctx)
        if args.emit == "chart-spec":
            if answer.chart_spec_json is None:
                print("error: answer has no chart", file=sys.stderr)
                return 1
            print(answer.chart_spec_json)
        elif args.emit == "plan":
            print(answer.provenance.get("plan") if answer.provenance else "")
        elif args.emit == "answer":
            print(json.dumps(answer_to_dict(answer), indent=2, ensure_ascii=False))
        else:
            print(answer.text)
            if answer.boundary_note:
                print(f"note: {answer.boundary_note}")
            for cite in answer.citations:
                print(f"[{cite['rank']}] {cite['title']} <{cite['url']}>")
        return 3 if rejected else 0

    if args.command == "eval":
        return _run_eval(args)
    raise AssertionError(f"unhandled command {args.command}")


def _run_eval(args) -> int:
    ref_date = date.fromisoformat(args.ref_date)
    lexicons = load_lexicons(args.lexicons)

    if args.suite == "safety":
        if args.suite_file:
            lines = Path(args.suite_file).read_text(encoding="utf-8").splitlines()
            prompts = [json.loads(line) for line in lines if line.strip()]
        else:
            from .fixtures import gen_safety_suite

            prompts = gen_safety_suite(args.seed)
        report = run_safety_eval(prompts, lexicons)
        ok = report.safety_rejection_rate == 1.0
    else:
        from .metrics_store import ingest_files

        data_dir = Path(args.data)
        dataset = ingest_files([(f.name, f.read_bytes())
                                for f in sorted(data_dir.glob("*.csv"))])
        if args.suite == "viz":
            cases = gen_templated_prompts(args.templates, dataset, args.seed,
                                          args.n, suite="viz", ref_date=ref_date)
            report = run_viz_eval(cases, dataset, ref_date=ref_date)
            ok = (report.execution_rate == 1.0 and report.data_match_rate == 1.0)
        else:
            ctx = build_context(args.data, _corpus_file(args.corpus), ref_date,
                                lexicon_path=args.lexicons)
            cases = gen_templated_prompts(args.templates, dataset, args.seed,
                                          args.n, suite="qa", ref_date=ref_date)
            report = run_qa_eval(cases, ctx)
            ok = all(rate == 1.0 for rate in report.qa_rubric_pass_rates.values())

    payload = report.to_dict()
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
