"""Input/output guardrails: PII detection and lexicon-based content gates.

Prompts containing structured personal identifiers or lexicon-matched
harmful phrases are rejected before any planning or execution happens;
outputs are blocked (harmful) or redacted (PII). Raw matched text is never
stored or logged, only a hash and the span location.

Detection is deliberately rule-based: regex detectors for structured
identifiers (emails, phones, SSNs, Luhn-valid card numbers, configured
government-ID and street-address shapes) and category lexicons matched as
contiguous token sequences within one sentence.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import LexiconLoadError

PII_KINDS = ("credit_card", "ssn", "phone", "govt_id", "email", "street_address")
HARM_CATEGORIES = ("hate_speech", "insults_sexual", "threats_misconduct")

_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}")
_PHONE_E164_RE = re.compile(r"(?<![\w.+])\+\d{10,15}(?!\d)")
_PHONE_NANP_RE = re.compile(r"(?<!\d)(?:\(\d{3}\)\s?|\d{3}[-. ])\d{3}[-. ]\d{4}(?!\d)")
_SSN_RE = re.compile(r"(?<![\d-])(\d{3})-(\d{2})-(\d{4})(?![\d-])")
_CARD_RE = re.compile(r"(?<!\d)(?<!\d\.)(?:\d[ -]?){12,18}\d(?!\d)(?!\.\d)")

_TOKEN_RE = re.compile(r"[a-z0-9']+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?;\n]+")


def luhn_valid(digits: str) -> bool:
    """Luhn checksum over a string of decimal digits."""
    total = 0
    for i, ch in enumerate(reversed(digits)):
        d = int(ch)
        if i % 2 == 1:
            d *= 2
            if d > 9:
                d -= 9
        total += d
    return total % 10 == 0


@dataclass(frozen=True, slots=True)
class PiiSpan:
    kind: str
    byte_range: tuple[int, int]  # [start, end) in UTF-8 bytes
    matched_text_hash: str


@dataclass(frozen=True, slots=True)
class GuardrailVerdict:
    decision: str  # pass | reject_input | block_output | redact_output
    categories: frozenset
    spans: tuple[PiiSpan, ...] = ()


@dataclass(frozen=True)
class CategoryLexicon:
    """Loaded phrase lexicons plus configured PII regex detectors."""

    phrases: dict  # category -> tuple of token-tuples
    pii_patterns: dict  # kind -> tuple of compiled regexes


def _default_lexicon_path() -> Path:
    return Path(str(resources.files("bizquery").joinpath("config/lexicons.cfg")))


def load_lexicons(path: str | Path | None = None) -> CategoryLexicon:
    """Parse the lexicon file: [category] sections with one phrase per line,
    plus a [pii_patterns] section of name = regex entries."""
    path = Path(path) if path is not None else _default_lexicon_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise LexiconLoadError(f"cannot read lexicon file {path}: {exc}") from None

    phrases: dict[str, list[tuple[str, ...]]] = {}
    pii_patterns: dict[str, list[re.Pattern]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if section is None:
            raise LexiconLoadError(f"{path}:{lineno}: content before first section")
        if section == "pii_patterns":
            if "=" not in line:
                raise LexiconLoadError(f"{path}:{lineno}: expected name = regex")
            name, _, pattern = line.partition("=")
            kind = name.strip().split(".")[0]
            if kind not in ("govt_id", "street_address"):
                raise LexiconLoadError(f"{path}:{lineno}: unknown pattern kind {kind!r}")
            try:
                compiled = re.compile(pattern.strip())
            except re.error as exc:
                raise LexiconLoadError(f"{path}:{lineno}: bad regex: {exc}") from None
            pii_patterns.setdefault(kind, []).append(compiled)
        else:
            if section not in HARM_CATEGORIES:
                raise LexiconLoadError(f"{path}:{lineno}: unknown category {section!r}")
            tokens = tuple(_TOKEN_RE.findall(line.lower()))
            if not tokens:
                raise LexiconLoadError(f"{path}:{lineno}: phrase has no tokens")
            phrases.setdefault(section, []).append(tokens)

    return CategoryLexicon(
        phrases={cat: tuple(ps) for cat, ps in phrases.items()},
        pii_patterns={kind: tuple(ps) for kind, ps in pii_patterns.items()},
    )


# --- PII detection -----------------------------------------------------------


def _char_spans(text: str, lexicons: CategoryLexicon | None) -> list[tuple[int, int, str, str]]:
    found: list[tuple[int, int, str, str]] = []
    for m in _EMAIL_RE.finditer(text):
        found.append((m.start(), m.end(), "email", m.group()))
    for rx in (_PHONE_E164_RE, _PHONE_NANP_RE):
        for m in rx.finditer(text):
            found.append((m.start(), m.end(), "phone", m.group()))
    for m in _SSN_RE.finditer(text):
        area = m.group(1)
        if area == "000" or area == "666" or area.startswith("9"):
            continue
        found.append((m.start(), m.end(), "ssn", m.group()))
    for m in _CARD_RE.finditer(text):
        digits = re.sub(r"[ -]", "", m.group())
        if 13 <= len(digits) <= 19 and luhn_valid(digits):
            found.append((m.start(), m.end(), "credit_card", m.group()))
    if lexicons is not None:
        for kind, patterns in lexicons.pii_patterns.items():
            for rx in patterns:
                for m in rx.finditer(text):
                    found.append((m.start(), m.end(), kind, m.group()))
    return found


def _merge(found: list[tuple[int, int, str, str]]) -> list[tuple[int, int, str, str]]:
    # longest span wins on overlap; ties by kind priority, then position
    priority = {k: i for i, k in enumerate(PII_KINDS)}
    ordered = sorted(found, key=lambda s: (-(s[1] - s[0]), priority[s[2]], s[0]))
    kept: list[tuple[int, int, str, str]] = []
    for cand in ordered:
        if all(cand[1] <= k[0] or cand[0] >= k[1] for k in kept):
            kept.append(cand)
    kept.sort(key=lambda s: s[0])
    return kept


def scan_pii(text: str, lexicons: CategoryLexicon | None = None) -> list[PiiSpan]:
    """Detect structured personal identifiers; spans are byte offsets."""
    kept = _merge(_char_spans(text, lexicons))
    spans: list[PiiSpan] = []
    for start, end, kind, matched in kept:
        bstart = len(text[:start].encode("utf-8"))
        bend = bstart + len(text[start:end].encode("utf-8"))
        digest = hashlib.sha256(matched.encode("utf-8")).hexdigest()
        spans.append(PiiSpan(kind=kind, byte_range=(bstart, bend), matched_text_hash=digest))
    return spans


# --- harmful-content classification -----------------------------------------


def classify_harmful(text: str, lexicons: CategoryLexicon) -> frozenset:
    """Categories whose lexicon phrases occur as contiguous token runs
    within a single sentence."""
    sentences = [s for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]
    token_runs = [_TOKEN_RE.findall(s.lower()) for s in sentences]
    hit: set[str] = set()
    for category, phrase_list in lexicons.phrases.items():
        for phrase in phrase_list:
            n = len(phrase)
            for tokens in token_runs:
                if n > len(tokens):
                    continue
                for i in range(len(tokens) - n + 1):
                    if tuple(tokens[i:i + n]) == phrase:
                        hit.add(category)
                        break
                if category in hit:
                    break
            if category in hit:
                break
    return frozenset(hit)


# --- gates -------------------------------------------------------------------


def gate_input(text: str, lexicons: CategoryLexicon) -> GuardrailVerdict:
    """Reject prompts containing PII or harmful content; pass otherwise."""
    spans = tuple(scan_pii(text, lexicons))
    categories = set(classify_harmful(text, lexicons))
    if spans:
        categories.add("pii")
    if categories:
        return GuardrailVerdict("reject_input", frozenset(categories), spans)
    return GuardrailVerdict("pass", frozenset())


def gate_output(text: str, lexicons: CategoryLexicon) -> GuardrailVerdict:
    """Block harmful output; redact PII-only output; pass clean output."""
    categories = set(classify_harmful(text, lexicons))
    if categories:
        return GuardrailVerdict("block_output", frozenset(categories))
    spans = tuple(scan_pii(text, lexicons))
    if spans:
        return GuardrailVerdict("redact_output", frozenset({"pii"}), spans)
    return GuardrailVerdict("pass", frozenset())


def redact(text: str, spans: tuple[PiiSpan, ...]) -> str:
    """Replace each span with a [REDACTED:<kind>] marker."""
    data = text.encode("utf-8")
    for span in sorted(spans, key=lambda s: s.byte_range[0], reverse=True):
        start, end = span.byte_range
        data = data[:start] + f"[REDACTED:{span.kind}]".encode("utf-8") + data[end:]
    return data.decode("utf-8")


def scan_corpus_docs(docs, lexicons: CategoryLexicon) -> list[dict]:
    """Ingestion-time scan: flag docs with PII or harmful hits for review."""
    flags = []
    for doc in docs:
        text = f"{doc.title}\n{doc.body}"
        spans = scan_pii(text, lexicons)
        categories = classify_harmful(text, lexicons)
        if spans or categories:
            flags.append({
                "doc_id": doc.doc_id,
                "pii_kinds": sorted({s.kind for s in spans}),
                "categories": sorted(categories),
            })
    return flags
