"""Deterministic query planner: classify a question and parse it into a
structured QueryPlan, or return rejection diagnostics.

The planner is a closed pattern/keyword grammar over five intents
(metric lookup, ranking slice, chart request, topic trend, persona).
Entities are grounded against the dataset catalog, metric words against a
keyword table, time phrases through the temporal resolver, and the result
is clamped against coverage to produce the knowledge-boundary outcome.
Everything the grammar cannot map becomes a diagnostic, never a crash.

Canonical plan serialization (single line, fields in fixed order)::

    persona
    metric company=Walmart metric=revenue years=2024
    metric companies=Apple,Google metrics=profits,revenue years=2023
    metric list=g500 group=sector:sum metric=revenue years=2024
    ranking list=g500 metric=revenue top_k=10 years=2024
    chart bar list=g500 metrics=revenue companies=Apple,Google,Nvidia years=2024
    chart scatter list=f1000 metrics=revenue,employees top_k=10 years=2024
    trend topic=ai scale=year years=2019..2024

Companies are sorted, so plans that differ only in mention order compare
equal; metric order is preserved because scatter axes are asymmetric.
Years render as `a..b` for contiguous runs longer than two.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from datetime import date
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InvalidPlan, MalformedRange
from .metrics_store import (
    METRIC_LABELS,
    METRICS,
    MetricsCatalog,
    NoMatch,
    ResolvedName,
    YearCoverage,
    resolve_company,
)
from .temporal import (
    ANCHOR_QUERY,
    BASIS_EXPLICIT,
    BoundaryOutcome,
    KIND_ABSOLUTE_YEAR,
    POLICY_METRIC,
    POLICY_RANKING,
    ResolvedTime,
    clamp_to_coverage,
    extract_years,
    parse_temporal,
    resolve,
)

INTENTS = ("metric_qa", "ranking_qa", "chart", "trend", "persona")
CHART_TYPES = ("bar", "line", "scatter")
GROUP_DIMS = ("sector", "country")
GROUP_AGGS = ("sum", "avg", "count", "min", "max")
MAX_CHART_COMPANIES = 10
MAX_TOP_K = 100
DEFAULT_TOP_K = 10


@dataclass(frozen=True, slots=True)
class QueryPlan:
    intent: str
    companies: tuple[str, ...]  # canonical names, sorted
    list_id: str
    metrics: tuple[str, ...]  # one or two, mention order
    time: ResolvedTime
    boundary: BoundaryOutcome
    chart_type: str | None = None
    top_k: int | None = None
    group: tuple[str, str] | None = None  # (dim, agg)
    topic_terms: tuple[str, ...] = ()

    def __post_init__(self):
        if self.intent not in INTENTS:
            raise InvalidPlan(f"unknown intent {self.intent!r}")
        if self.intent == "chart":
            if self.chart_type not in CHART_TYPES:
                raise InvalidPlan("chart intent requires a chart type")
            if not self.metrics:
                raise InvalidPlan("chart intent requires metrics")
        if self.chart_type == "scatter" and len(self.metrics) != 2:
            raise InvalidPlan("scatter requires exactly two metrics")
        if self.top_k is not None and not 1 <= self.top_k <= MAX_TOP_K:
            raise InvalidPlan(f"top_k out of range: {self.top_k}")
        for m in self.metrics:
            if m not in METRICS:
                raise InvalidPlan(f"unknown metric {m!r}")


@dataclass(frozen=True, slots=True)
class ParseDiagnostics:
    kind: str  # out_of_grammar | unknown_entity | out_of_domain | boundary_reject
    message: str
    suggestions: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.message:
            raise InvalidPlan("diagnostics message must be non-empty")


# --- grammar configuration ----------------------------------------------------

_PHRASE_TOKEN_RE = re.compile(r"[a-z0-9&]+")
_WORD_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9&'’.]*")
_TOP_K_RE = re.compile(r"\btop\s+(\d+|five|ten)\b", re.I)
_K_LARGEST_RE = re.compile(r"\b(\d+|five|ten)\s+(?:largest|biggest)\b", re.I)
_WORD_NUMS = {"five": 5, "ten": 10}


def _phrase_tokens(phrase: str) -> tuple[str, ...]:
    return tuple(_PHRASE_TOKEN_RE.findall(phrase.lower()))


def _split_list(raw: str) -> list[str]:
    return [p.strip() for p in raw.split(",") if p.strip()]


@dataclass(frozen=True)
class Grammar:
    metric_phrases: tuple  # ((tokens), metric) sorted longest first
    out_of_domain: tuple  # phrase token tuples
    chart_verbs: frozenset
    chart_verbs_with_metric: frozenset
    chart_nouns: tuple
    ranking_keywords: tuple
    trend_keywords: tuple
    persona_patterns: tuple  # normalized phrase strings
    chart_type_phrases: tuple  # ((tokens), chart_type)
    scale_phrases: tuple  # ((tokens), scale)
    group_dim_phrases: tuple  # ((tokens), dim)
    group_agg_phrases: tuple  # ((tokens), agg)
    list_phrases: tuple  # ((tokens), list_id)
    stopwords: frozenset
    vocab: frozenset  # all grammar tokens; excluded from entity candidates
    persona_text: str
    persona_version: int
    answer_templates: dict


def _load_phrase_table(section, sort_desc=True) -> tuple:
    out = []
    for key, raw in section.items():
        for phrase in _split_list(raw):
            out.append((_phrase_tokens(phrase), key))
    if sort_desc:
        out.sort(key=lambda e: (-len(e[0]), e[0]))
    return tuple(out)


def load_grammar(path: str | Path) -> Grammar:
    cp = configparser.ConfigParser(interpolation=None)
    read = cp.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"grammar config not found: {path}")
    try:
        metric_phrases = _load_phrase_table(cp["metric_keywords"])
        for _, metric in metric_phrases:
            if metric not in METRICS:
                raise ConfigError(f"metric_keywords references unknown metric {metric!r}")
        ood = tuple(sorted((_phrase_tokens(p) for p in
                            _split_list(cp["out_of_domain_metrics"]["phrases"])),
                           key=len, reverse=True))
        chart_verbs = frozenset(_split_list(cp["intent_chart"]["verbs"]))
        chart_vwm = frozenset(_split_list(cp["intent_chart"]["verbs_with_metric"]))
        chart_nouns = tuple(_phrase_tokens(p) for p in _split_list(cp["intent_chart"]["nouns"]))
        ranking_keywords = tuple(_phrase_tokens(p) for p in
                                 _split_list(cp["intent_ranking"]["keywords"]))
        trend_keywords = tuple(_phrase_tokens(p) for p in
                               _split_list(cp["intent_trend"]["keywords"]))
        persona_patterns = tuple(" ".join(_phrase_tokens(p)) for p in
                                 _split_list(cp["intent_persona"]["patterns"]))
        chart_type_phrases = _load_phrase_table(cp["chart_type_keywords"])
        scale_phrases = _load_phrase_table(cp["scale_keywords"])
        group_dims = _load_phrase_table(cp["group_dims"])
        group_aggs = _load_phrase_table(cp["group_aggs"])
        list_phrases = _load_phrase_table(cp["lists"])
        stopwords = frozenset(_split_list(cp["stopwords"]["words"]))
        persona_text = cp["persona"]["text"].strip()
        persona_version = cp["persona"].getint("version")
        answer_templates = dict(cp["answer_templates"])
    except KeyError as exc:
        raise ConfigError(f"grammar config missing section/key: {exc}") from None

    vocab: set[str] = set(stopwords) | set(chart_verbs) | set(chart_vwm)
    for table in (metric_phrases, chart_type_phrases, scale_phrases,
                  group_dims, group_aggs, list_phrases):
        for tokens, _ in table:
            vocab.update(tokens)
    for tokens in (*chart_nouns, *ranking_keywords, *trend_keywords, *ood):
        vocab.update(tokens)
    vocab.update(t for p in persona_patterns for t in p.split())
    vocab.update(("fortune", "global", "companies", "company", "people"))

    return Grammar(
        metric_phrases=metric_phrases,
        out_of_domain=ood,
        chart_verbs=chart_verbs,
        chart_verbs_with_metric=chart_vwm,
        chart_nouns=chart_nouns,
        ranking_keywords=ranking_keywords,
        trend_keywords=trend_keywords,
        persona_patterns=persona_patterns,
        chart_type_phrases=chart_type_phrases,
        scale_phrases=scale_phrases,
        group_dim_phrases=group_dims,
        group_agg_phrases=group_aggs,
        list_phrases=list_phrases,
        stopwords=stopwords,
        vocab=frozenset(vocab),
        persona_text=persona_text,
        persona_version=persona_version,
        answer_templates=answer_templates,
    )


@lru_cache(maxsize=1)
def default_grammar() -> Grammar:
    return load_grammar(str(resources.files("bizquery").joinpath("config/grammar.cfg")))


# --- tokenization -------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _Token:
    text: str
    norm: str  # lowercase, possessive and trailing punctuation stripped
    start: int
    end: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    for m in _WORD_RE.finditer(text):
        raw = m.group()
        norm = raw.lower()
        for suffix in ("'s", "’s"):
            if norm.endswith(suffix):
                norm = norm[: -len(suffix)]
        norm = norm.rstrip(".'’")
        if norm:
            tokens.append(_Token(raw, norm, m.start(), m.end()))
    return tokens


def _find_phrases(tokens: list[_Token], table: tuple, mask: list[bool]):
    """Longest-first phrase matches over unmasked tokens.

    Returns (position, value) pairs in text order and marks matched tokens
    in `mask`.
    """
    found = []
    for phrase, value in table:
        n = len(phrase)
        i = 0
        while i <= len(tokens) - n:
            window = tokens[i:i + n]
            if (not any(mask[i:i + n])
                    and all(t.norm == p for t, p in zip(window, phrase))):
                found.append((i, value))
                for j in range(i, i + n):
                    mask[j] = True
                i += n
            else:
                i += 1
    found.sort()
    return found


def _contains_phrase(tokens: list[_Token], phrase: tuple) -> bool:
    n = len(phrase)
    norms = [t.norm for t in tokens]
    for i in range(len(norms) - n + 1):
        if all(norms[i + j] == phrase[j] for j in range(n)):
            return True
    return False


# --- intent classification ----------------------------------------------------


def classify_intent(text: str, grammar: Grammar | None = None) -> str:
    """Deterministic intent priority: persona > chart > ranking > trend > metric."""
    if not text.strip():
        raise ValueError("empty query")
    grammar = grammar or default_grammar()
    tokens = _tokenize(text)
    norm_text = " ".join(t.norm for t in tokens)
    norms = {t.norm for t in tokens}

    for pattern in grammar.persona_patterns:
        if pattern in norm_text:
            return "persona"

    has_metric = any(_contains_phrase(tokens, phrase)
                     for phrase, _ in grammar.metric_phrases)
    if norms & grammar.chart_verbs:
        return "chart"
    if any(_contains_phrase(tokens, noun) for noun in grammar.chart_nouns):
        return "chart"
    if has_metric and (norms & grammar.chart_verbs_with_metric):
        return "chart"

    if _TOP_K_RE.search(text) or _K_LARGEST_RE.search(text):
        return "ranking_qa"
    if any(_contains_phrase(tokens, kw) for kw in grammar.ranking_keywords):
        return "ranking_qa"
    if tokens and tokens[0].norm == "list":
        return "ranking_qa"

    if not has_metric and any(_contains_phrase(tokens, kw)
                              for kw in grammar.trend_keywords):
        return "trend"
    return "metric_qa"


# --- entity extraction ----------------------------------------------------------


def _entity_normalize(name: str) -> str:
    lowered = name.lower().replace("'s ", " ").replace("’s ", " ")
    return " ".join(_PHRASE_TOKEN_RE.findall(lowered))


def _catalog_name_map(catalog: MetricsCatalog) -> dict:
    mapping: dict[str, str] = {}
    for canonical, info in catalog.companies.items():
        for form in (canonical, *info.aliases):
            mapping.setdefault(_entity_normalize(form), canonical)
    return mapping


def _extract_companies(text: str, tokens: list[_Token], mask: list[bool],
                       catalog: MetricsCatalog, grammar: Grammar):
    """Ground company mentions; returns (canonical names in order, unknown
    candidate phrases with suggestions)."""
    name_map = _catalog_name_map(catalog)
    max_len = max((len(k.split()) for k in name_map), default=1)
    found: list[str] = []

    # pass 1: exact/alias n-gram scan, longest first, case-insensitive
    for n in range(max_len, 0, -1):
        i = 0
        while i <= len(tokens) - n:
            if any(mask[i:i + n]):
                i += 1
                continue
            gram = " ".join(t.norm for t in tokens[i:i + n])
            gram = _entity_normalize(gram)
            canonical = name_map.get(gram)
            if canonical:
                if canonical not in found:
                    found.append(canonical)
                for j in range(i, i + n):
                    mask[j] = True
                i += n
            else:
                i += 1

    # pass 2: capitalized runs outside the grammar vocabulary -> fuzzy
    unknown: list[tuple[str, tuple[str, ...]]] = []
    run: list[int] = []

    def flush(run_idx: list[int]):
        if not run_idx:
            return
        phrase = " ".join(tokens[k].text for k in run_idx)
        phrase = re.sub(r"['’]s$", "", phrase).rstrip(".,")
        result = resolve_company(catalog, phrase)
        if isinstance(result, ResolvedName):
            if result.canonical not in found:
                found.append(result.canonical)
            for k in run_idx:
                mask[k] = True
        elif isinstance(result, NoMatch):
            unknown.append((phrase, result.suggestions))

    prev_end = None
    for idx, tok in enumerate(tokens):
        is_candidate = (tok.text[0].isupper() and not mask[idx]
                        and tok.norm not in grammar.vocab
                        and not tok.norm.isdigit())
        gap_break = prev_end is not None and "," in text[prev_end:tok.start]
        if is_candidate and run and not gap_break:
            run.append(idx)
        elif is_candidate:
            flush(run)
            run = [idx]
        else:
            flush(run)
            run = []
        prev_end = tok.end
    flush(run)
    return found, unknown


# --- parsing -------------------------------------------------------------------


def _years_str(years: tuple[int, ...]) -> str:
    ys = sorted(years)
    if len(ys) > 2 and ys == list(range(ys[0], ys[-1] + 1)):
        return f"{ys[0]}..{ys[-1]}"
    return ",".join(str(y) for y in ys)


def canonical_form(plan: QueryPlan) -> str:
    """Single-line deterministic serialization; equal plans <=> equal strings."""
    if plan.intent == "persona":
        return "persona"
    if plan.intent == "trend":
        return (f"trend topic={','.join(plan.topic_terms)} "
                f"scale={plan.chart_type or 'year'} years={_years_str(plan.time.years)}")
    years = plan.boundary.effective_years or plan.time.years
    parts: list[str] = []
    if plan.intent == "metric_qa":
        parts.append("metric")
        if plan.group:
            parts.append(f"list={plan.list_id}")
            parts.append(f"group={plan.group[0]}:{plan.group[1]}")
        elif len(plan.companies) == 1:
            parts.append(f"company={plan.companies[0]}")
        else:
            parts.append(f"companies={','.join(plan.companies)}")
        if len(plan.metrics) == 1:
            parts.append(f"metric={plan.metrics[0]}")
        else:
            parts.append(f"metrics={','.join(plan.metrics)}")
    elif plan.intent == "ranking_qa":
        parts.append("ranking")
        parts.append(f"list={plan.list_id}")
        parts.append(f"metric={plan.metrics[0]}")
        parts.append(f"top_k={plan.top_k}")
    elif plan.intent == "chart":
        parts.append("chart")
        parts.append(plan.chart_type)
        parts.append(f"list={plan.list_id}")
        parts.append(f"metrics={','.join(plan.metrics)}")
        if plan.group:
            parts.append(f"group={plan.group[0]}:{plan.group[1]}")
        elif plan.top_k is not None:
            parts.append(f"top_k={plan.top_k}")
        else:
            parts.append(f"companies={','.join(plan.companies)}")
    parts.append(f"years={_years_str(years)}")
    return " ".join(parts)


def _supported_metric_names() -> tuple[str, ...]:
    return tuple(METRIC_LABELS[m].lower() for m in METRICS)


def _pick_top_k(text: str, intent: str):
    m = _TOP_K_RE.search(text)
    if not m:
        m = _K_LARGEST_RE.search(text)
    if m:
        raw = m.group(1).lower()
        return _WORD_NUMS.get(raw) or int(raw)
    if intent == "ranking_qa":
        return DEFAULT_TOP_K
    return None


def _choose_list(catalog: MetricsCatalog, explicit: str | None,
                 companies: list[str]) -> str:
    if explicit:
        return explicit
    preference = [lid for lid in ("g500", "f1000") if lid in catalog.lists]
    preference += sorted(lid for lid in catalog.lists if lid not in preference)
    if companies:
        for lid in preference:
            if all(lid in catalog.companies[c].coverage for c in companies):
                return lid
        # fall back to the first company's widest-coverage list
        cov = catalog.companies[companies[0]].coverage
        return max(cov, key=lambda lid: (len(cov[lid]), lid))
    if "g500" in catalog.lists:
        return "g500"
    return max(catalog.lists, key=lambda lid: (len(catalog.lists[lid].years), lid))


def _company_coverage(catalog: MetricsCatalog, companies: tuple[str, ...],
                      list_id: str) -> YearCoverage:
    """Coverage restricted to years where every requested company is listed."""
    shared: set[int] | None = None
    for c in companies:
        years = set(catalog.companies[c].coverage.get(list_id, ()))
        shared = years if shared is None else shared & years
    if shared:
        ys = tuple(sorted(shared))
        return YearCoverage(years=ys, cutoff_year=ys[-1])
    return YearCoverage(years=catalog.lists[list_id].years,
                        cutoff_year=catalog.lists[list_id].years[-1])


def parse_query(text: str, catalog: MetricsCatalog, ref_date: date,
                grammar: Grammar | None = None):
    """Parse a query into a QueryPlan or ParseDiagnostics (never raises on
    user input; internal errors surface only for corrupted catalogs)."""
    if not text.strip():
        raise ValueError("empty query")
    grammar = grammar or default_grammar()
    intent = classify_intent(text, grammar)
    tokens = _tokenize(text)
    mask = [False] * len(tokens)

    if intent == "persona":
        latest = catalog.latest_year()
        return QueryPlan(
            intent="persona",
            companies=(),
            list_id=next(iter(sorted(catalog.lists))),
            metrics=(),
            time=ResolvedTime((latest,), BASIS_EXPLICIT),
            boundary=BoundaryOutcome("in_range", (latest,), None, latest),
        )

    # out-of-domain metric words take precedence over everything else
    if any(_contains_phrase(tokens, phrase) for phrase in grammar.out_of_domain):
        return ParseDiagnostics(
            kind="out_of_domain",
            message=("That metric is not in the supported set. Supported metrics: "
                     + ", ".join(_supported_metric_names()) + "."),
            suggestions=_supported_metric_names(),
        )

    list_hits = _find_phrases(tokens, grammar.list_phrases, mask)
    explicit_list = list_hits[0][1] if list_hits else None
    if explicit_list and explicit_list not in catalog.lists:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message=f"The {explicit_list} list is not loaded.",
            suggestions=tuple(sorted(catalog.lists)),
        )

    companies, unknown = _extract_companies(text, tokens, mask, catalog, grammar)

    metric_hits = _find_phrases(tokens, grammar.metric_phrases, mask)
    metrics: list[str] = []
    for _, metric in metric_hits:
        if metric not in metrics:
            metrics.append(metric)
    if len(metrics) > 2:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message="At most two metrics per query are supported.",
            suggestions=tuple(metrics[:2]),
        )

    if unknown and not companies and intent in ("metric_qa", "chart"):
        phrase, suggestions = unknown[0]
        return ParseDiagnostics(
            kind="unknown_entity",
            message=f"\"{phrase}\" doesn't match any company in the loaded lists.",
            suggestions=suggestions,
        )

    try:
        expr = parse_temporal(text, ref_date)
    except MalformedRange as exc:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message=f"Year range is reversed ({exc}).",
            suggestions=(),
        )

    top_k = _pick_top_k(text, intent)
    if top_k is not None and not 1 <= top_k <= MAX_TOP_K:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message=f"top_k must be between 1 and {MAX_TOP_K}.",
            suggestions=(),
        )

    group_dims = _find_phrases(tokens, grammar.group_dim_phrases, mask)
    group = None
    if group_dims:
        aggs = _find_phrases(tokens, grammar.group_agg_phrases, mask)
        agg = aggs[0][1] if aggs else "sum"
        group = (group_dims[0][1], agg)

    if intent == "trend":
        return _parse_trend(text, tokens, mask, grammar, expr, ref_date)

    if intent == "ranking_qa" and not metrics:
        metrics = ["revenue"]
    if not metrics and group is not None and group[1] == "count":
        metrics = ["revenue"]  # carrier only; count ignores the metric
    if not metrics:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message=("I couldn't find a supported metric in the question. "
                     "Supported metrics: " + ", ".join(_supported_metric_names()) + "."),
            suggestions=_supported_metric_names(),
        )
    if intent == "metric_qa" and not companies and group is None:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message="Metric lookups need a company name (or a by-sector/by-country grouping).",
            suggestions=(),
        )

    list_id = _choose_list(catalog, explicit_list, companies)
    companies_t = tuple(sorted(companies))

    if companies_t:
        cov = _company_coverage(catalog, companies_t, list_id)
    else:
        years = catalog.lists[list_id].years
        cov = YearCoverage(years=years, cutoff_year=years[-1])

    # discrete multi-year mentions ("2012, 2015 and 2020") keep the exact set
    mentioned_years = extract_years(text)
    if expr.kind == KIND_ABSOLUTE_YEAR and len(mentioned_years) > 1:
        resolved = ResolvedTime(tuple(sorted(mentioned_years)), BASIS_EXPLICIT)
    else:
        resolved = resolve(expr, ref_date, cov.cutoff_year, ANCHOR_QUERY)

    policy = POLICY_RANKING if intent == "ranking_qa" else POLICY_METRIC
    boundary = clamp_to_coverage(resolved, cov, policy)

    chart_type = None
    if intent == "chart":
        type_hits = _find_phrases(tokens, grammar.chart_type_phrases, mask)
        chart_type = type_hits[0][1] if type_hits else None
        if chart_type is None:
            if len(metrics) == 2:
                chart_type = "scatter"
            elif len(boundary.effective_years or resolved.years) > 1:
                chart_type = "line"
            else:
                chart_type = "bar"
        if chart_type == "scatter" and len(metrics) != 2:
            return ParseDiagnostics(
                kind="out_of_grammar",
                message="Scatter charts need exactly two metrics (x and y).",
                suggestions=(),
            )
        if chart_type != "scatter" and len(metrics) == 2:
            chart_type = "scatter"
        if chart_type == "bar" and group is None \
                and len(boundary.effective_years or resolved.years) > 1:
            chart_type = "line"  # an x of companies cannot span years
        if chart_type == "scatter" and len(boundary.effective_years or resolved.years) > 1:
            return ParseDiagnostics(
                kind="out_of_grammar",
                message="Scatter charts compare two metrics within a single year.",
                suggestions=(),
            )
        if not companies_t and top_k is None and group is None:
            return ParseDiagnostics(
                kind="out_of_grammar",
                message="Chart requests need company names or a top-N selection.",
                suggestions=(),
            )
        if len(companies_t) > MAX_CHART_COMPANIES:
            return ParseDiagnostics(
                kind="out_of_grammar",
                message=(f"Charts are limited to {MAX_CHART_COMPANIES} companies; "
                         "try a top-N request instead."),
                suggestions=("top 10",),
            )

    return QueryPlan(
        intent=intent,
        companies=companies_t,
        list_id=list_id,
        metrics=tuple(metrics),
        time=resolved,
        boundary=boundary,
        chart_type=chart_type,
        top_k=top_k,
        group=group,
    )


def _parse_trend(text: str, tokens, mask, grammar: Grammar, expr, ref_date: date):
    scale_hits = _find_phrases(tokens, grammar.scale_phrases, mask)
    scale = scale_hits[0][1] if scale_hits else "year"
    mentioned_years = extract_years(text)
    if expr.kind == KIND_ABSOLUTE_YEAR and len(mentioned_years) > 1:
        resolved = ResolvedTime(tuple(sorted(mentioned_years)), BASIS_EXPLICIT)
    else:
        resolved = resolve(expr, ref_date, ref_date.year, ANCHOR_QUERY)
    topic: list[str] = []
    for idx, tok in enumerate(tokens):
        if mask[idx] or tok.norm in grammar.stopwords or tok.norm in grammar.vocab:
            continue
        if tok.norm.isdigit():
            continue
        if tok.norm not in topic:
            topic.append(tok.norm)
    if not topic:
        return ParseDiagnostics(
            kind="out_of_grammar",
            message="I couldn't identify a topic to trend.",
            suggestions=(),
        )
    years = resolved.years
    return QueryPlan(
        intent="trend",
        companies=(),
        list_id="",
        metrics=(),
        time=resolved,
        boundary=BoundaryOutcome("in_range", years, None, years[-1]),
        chart_type=scale,  # scale rides in chart_type for trend plans
        topic_terms=tuple(topic),
    )
