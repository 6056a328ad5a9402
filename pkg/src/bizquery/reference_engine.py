"""Article corpus index, BM25 retrieval, and blended re-ranking.

Content referencing searches the rendered answer text over the corpus:
a first BM25 stage produces candidates, a second stage re-scores them by
blending the normalized BM25 score with title overlap and publication
recency. Citations attached to an answer always come from the index
snapshot whose fingerprint is recorded on the answer.

Tokenization is deliberately minimal and fully reproducible: lowercase,
split on non-alphanumeric characters, drop tokens shorter than two
characters, no stemming, no stopword list.

BM25 uses k1=1.2, b=0.75 and the non-negative smoothed idf
ln(1 + (N - df + 0.5) / (df + 0.5)); query terms are deduplicated.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path

from .errors import BadWeights, DuplicateDocId

BM25_K1 = 1.2
BM25_B = 0.75
DEFAULT_TOP_N = 50
DEFAULT_WEIGHTS = {"w_bm25": 0.6, "w_title": 0.3, "w_recency": 0.1}
RECENCY_HALF_LIFE_DAYS = 365.0

_SPLIT_RE = re.compile(r"[^0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric, drop tokens shorter than 2."""
    return [t for t in _SPLIT_RE.split(text.lower()) if len(t) >= 2]


@dataclass(frozen=True, slots=True)
class ArticleDoc:
    doc_id: str
    title: str
    body: str
    published: date
    section: str
    url: str


@dataclass(frozen=True)
class CorpusIndex:
    postings: dict  # term -> tuple of (doc_id, term frequency), doc_id asc
    doc_lengths: dict  # doc_id -> body token count
    avg_doc_length: float
    doc_count: int
    title_terms: dict  # doc_id -> frozenset of title tokens
    docs: dict  # doc_id -> ArticleDoc
    fingerprint: str


@dataclass(frozen=True, slots=True)
class ReferenceHit:
    doc_id: str
    score: float  # normalized to [0, 1]
    stage_scores: dict
    rank: int


def corpus_fingerprint(docs: list[ArticleDoc]) -> str:
    payload = "\n".join(
        json.dumps(
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "body": d.body,
                "published": d.published.isoformat(),
                "section": d.section,
                "url": d.url,
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        for d in sorted(docs, key=lambda d: d.doc_id)
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def index_corpus(docs: list[ArticleDoc]) -> CorpusIndex:
    """Build the inverted index; the body is indexed, titles are kept as
    term sets for the re-ranking stage."""
    seen: set[str] = set()
    for doc in docs:
        if doc.doc_id in seen:
            raise DuplicateDocId(doc.doc_id)
        seen.add(doc.doc_id)

    postings_tmp: dict[str, dict[str, int]] = {}
    doc_lengths: dict[str, int] = {}
    title_terms: dict[str, frozenset] = {}
    for doc in sorted(docs, key=lambda d: d.doc_id):
        tokens = tokenize(doc.body)
        doc_lengths[doc.doc_id] = len(tokens)
        title_terms[doc.doc_id] = frozenset(tokenize(doc.title))
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            postings_tmp.setdefault(tok, {})[doc.doc_id] = tf

    postings = {
        term: tuple(sorted(by_doc.items()))
        for term, by_doc in sorted(postings_tmp.items())
    }
    n = len(docs)
    avg_len = (math.fsum(doc_lengths.values()) / n) if n else 0.0
    return CorpusIndex(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_doc_length=avg_len,
        doc_count=n,
        title_terms=title_terms,
        docs={d.doc_id: d for d in docs},
        fingerprint=corpus_fingerprint(docs),
    )


def _idf(index: CorpusIndex, term: str) -> float:
    df = len(index.postings.get(term, ()))
    if df == 0:
        return 0.0
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def bm25_scores(index: CorpusIndex, query_terms: list[str]) -> dict:
    """Raw BM25 score per matching document."""
    scores: dict[str, float] = {}
    for term in sorted(set(query_terms)):
        posting = index.postings.get(term)
        if not posting:
            continue
        idf = _idf(index, term)
        for doc_id, tf in posting:
            k = BM25_K1 * (1.0 - BM25_B + BM25_B * index.doc_lengths[doc_id] / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (BM25_K1 + 1.0) / (tf + k)
    return scores


def retrieve(index: CorpusIndex, answer_text: str, n: int = DEFAULT_TOP_N) -> list[ReferenceHit]:
    """Top-n documents by BM25 over the answer's tokens.

    Ties break by doc_id ascending; an answer with no indexable tokens
    yields an empty result.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    terms = tokenize(answer_text)
    if not terms:
        return []
    raw = bm25_scores(index, terms)
    if not raw:
        return []
    ordered = sorted(raw.items(), key=lambda kv: (-kv[1], kv[0]))[:n]
    top = ordered[0][1]
    hits = []
    for rank, (doc_id, score) in enumerate(ordered, start=1):
        hits.append(ReferenceHit(
            doc_id=doc_id,
            score=score / top if top > 0 else 0.0,
            stage_scores={"bm25": score},
            rank=rank,
        ))
    return hits


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a or not b:
        return 0.0
    return len(a & b) / len(a | b)


def rerank(hits: list[ReferenceHit], answer_text: str, ref_date: date,
           index: CorpusIndex, weights: dict | None = None) -> list[ReferenceHit]:
    """Blend normalized BM25 with title overlap and recency, then re-sort.

    score = w_bm25 * bm25/max_bm25 + w_title * Jaccard(answer, title)
          + w_recency * exp(-ln2 * age_days / 365)
    """
    w = dict(DEFAULT_WEIGHTS)
    if weights:
        w.update(weights)
    total = w["w_bm25"] + w["w_title"] + w["w_recency"]
    if abs(total - 1.0) > 1e-9:
        raise BadWeights(f"weights sum to {total}, expected 1")
    if not hits:
        return []
    answer_terms = frozenset(tokenize(answer_text))
    max_bm25 = max(h.stage_scores["bm25"] for h in hits)
    rescored = []
    for h in hits:
        doc = index.docs[h.doc_id]
        bm25_norm = h.stage_scores["bm25"] / max_bm25 if max_bm25 > 0 else 0.0
        title_overlap = _jaccard(answer_terms, index.title_terms[h.doc_id])
        age_days = max(0, (ref_date - doc.published).days)
        recency = math.exp(-math.log(2.0) * age_days / RECENCY_HALF_LIFE_DAYS)
        score = w["w_bm25"] * bm25_norm + w["w_title"] * title_overlap + w["w_recency"] * recency
        rescored.append((score, h.doc_id, {
            "bm25": h.stage_scores["bm25"],
            "title_overlap": title_overlap,
            "recency": recency,
        }))
    rescored.sort(key=lambda t: (-t[0], t[1]))
    return [
        ReferenceHit(doc_id=doc_id, score=score, stage_scores=stages, rank=rank)
        for rank, (score, doc_id, stages) in enumerate(rescored, start=1)
    ]


DEFAULT_CITE_THRESHOLD = 0.2
DEFAULT_MAX_CITATIONS = 3


def attach_references(answer, hits: list[ReferenceHit], index: CorpusIndex,
                      threshold: float = DEFAULT_CITE_THRESHOLD,
                      max_citations: int = DEFAULT_MAX_CITATIONS):
    """Attach qualifying hits to an answer as citation entries.

    Persona answers never carry citations. The index fingerprint is
    recorded next to the citations so consumers can verify the snapshot.
    """
    if getattr(answer, "kind", None) == "persona":
        return replace(answer, citations=())
    chosen = [h for h in hits if h.score >= threshold][:max_citations]
    citations = tuple(
        {
            "doc_id": h.doc_id,
            "title": index.docs[h.doc_id].title,
            "url": index.docs[h.doc_id].url,
            "score": round(h.score, 6),
            "rank": h.rank,
        }
        for h in chosen
    )
    return replace(answer, citations=citations)


# --- corpus and index persistence --------------------------------------------


def parse_corpus_jsonl(text: str) -> list[ArticleDoc]:
    """One JSON document per line: {doc_id, title, body, published, section, url}."""
    docs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        obj = json.loads(line)
        try:
            docs.append(ArticleDoc(
                doc_id=str(obj["doc_id"]),
                title=str(obj["title"]),
                body=str(obj["body"]),
                published=date.fromisoformat(obj["published"]),
                section=str(obj["section"]),
                url=str(obj["url"]),
            ))
        except (KeyError, ValueError) as exc:
            raise ValueError(f"corpus line {lineno}: {exc}") from None
    return docs


def serialize_corpus_jsonl(docs: list[ArticleDoc]) -> str:
    lines = []
    for d in docs:
        lines.append(json.dumps(
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "body": d.body,
                "published": d.published.isoformat(),
                "section": d.section,
                "url": d.url,
            },
            ensure_ascii=False,
        ))
    return "\n".join(lines) + "\n"


def save_index(index: CorpusIndex, path: str | Path) -> None:
    """Persist the index as JSON (docs + fingerprint; postings are rebuilt
    on load, which guarantees postings/docs consistency)."""
    payload = {
        "format": "bizquery-corpus-index-v1",
        "fingerprint": index.fingerprint,
        "docs": [
            {
                "doc_id": d.doc_id,
                "title": d.title,
                "body": d.body,
                "published": d.published.isoformat(),
                "section": d.section,
                "url": d.url,
            }
            for d in sorted(index.docs.values(), key=lambda d: d.doc_id)
        ],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_index(path: str | Path) -> CorpusIndex:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != "bizquery-corpus-index-v1":
        raise ValueError("unrecognized index file format")
    docs = [
        ArticleDoc(
            doc_id=d["doc_id"],
            title=d["title"],
            body=d["body"],
            published=date.fromisoformat(d["published"]),
            section=d["section"],
            url=d["url"],
        )
        for d in payload["docs"]
    ]
    index = index_corpus(docs)
    if index.fingerprint != payload["fingerprint"]:
        raise ValueError("index fingerprint mismatch after rebuild")
    return index
