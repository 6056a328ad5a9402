import math
from dataclasses import replace
from datetime import date

import pytest

from bizquery.errors import BadWeights, DuplicateDocId
from bizquery.reference_engine import (
    ArticleDoc,
    attach_references,
    bm25_scores,
    corpus_fingerprint,
    index_corpus,
    load_index,
    parse_corpus_jsonl,
    rerank,
    retrieve,
    save_index,
    serialize_corpus_jsonl,
    tokenize,
)
from bizquery.responder import Answer

from conftest import REF_DATE


def _doc(doc_id, body, title="title words", published=date(2023, 5, 1)):
    return ArticleDoc(doc_id=doc_id, title=title, body=body,
                      published=published, section="Finance",
                      url=f"https://example.com/{doc_id}")


def test_tokenizer_rules():
    assert tokenize("The AI boom: 2024, re-shaped U.S. markets!") == \
        ["the", "ai", "boom", "2024", "re", "shaped", "markets"]


def test_shared_term_posting():
    index = index_corpus([_doc("a", "shared term here"),
                          _doc("b", "another shared thing")])
    assert len(index.postings["shared"]) == 2


def test_empty_corpus():
    index = index_corpus([])
    assert index.doc_count == 0
    assert retrieve(index, "anything at all") == []


def test_duplicate_doc_id():
    with pytest.raises(DuplicateDocId):
        index_corpus([_doc("a", "x y"), _doc("a", "z w")])


def test_fixture_corpus_stats(corpus, corpus_index):
    docs, _ = corpus
    assert corpus_index.doc_count == 200
    # independent token-count script (own tokenizer)
    import re

    def count(text):
        return len([t for t in re.split(r"[^0-9a-z]+", text.lower()) if len(t) >= 2])

    mean = sum(count(d.body) for d in docs) / len(docs)
    assert math.isclose(corpus_index.avg_doc_length, mean, rel_tol=1e-12)


def test_unique_term_ranks_first(corpus_index):
    hits = retrieve(corpus_index, "Quorvex hydrofoil program", 50)
    assert hits[0].doc_id == "doc000"
    assert hits[0].rank == 1
    assert hits[0].score == 1.0


def test_short_token_query_empty(corpus_index):
    assert retrieve(corpus_index, "a b c !") == []


def test_planted_recall(corpus, corpus_index):
    _, planted = corpus
    for pair in planted:
        ids = [h.doc_id for h in retrieve(corpus_index, pair["answer"], 50)]
        assert pair["doc_id"] in ids


def test_bm25_matches_naive_reference(micro_corpus):
    index = index_corpus(micro_corpus)
    queries = ["market growth", "credit audit deficit", "merger supply demand export"]
    for query in queries:
        mine = bm25_scores(index, tokenize(query))
        # naive double loop
        toks = {d.doc_id: tokenize(d.body) for d in micro_corpus}
        n = len(micro_corpus)
        avg = sum(len(t) for t in toks.values()) / n
        for doc_id, got in mine.items():
            want = 0.0
            for term in sorted(set(tokenize(query))):
                df = sum(1 for t in toks.values() if term in t)
                if df == 0:
                    continue
                idf = math.log(1 + (n - df + 0.5) / (df + 0.5))
                tf = toks[doc_id].count(term)
                if tf == 0:
                    continue
                k = 1.2 * (1 - 0.75 + 0.75 * len(toks[doc_id]) / avg)
                want += idf * tf * (1.2 + 1) / (tf + k)
            assert abs(got - want) < 1e-9


def test_rerank_recency_breaks_ties():
    recent = _doc("recent", "solar policy energy", title="solar shift",
                  published=date(2025, 6, 1))
    old = _doc("older", "solar policy energy", title="solar shift",
               published=date(2015, 6, 1))
    index = index_corpus([recent, old])
    hits = retrieve(index, "solar policy energy")
    ranked = rerank(hits, "solar policy energy", REF_DATE, index)
    assert ranked[0].doc_id == "recent"


def test_rerank_single_hit():
    index = index_corpus([_doc("only", "unique nugget inside")])
    hits = retrieve(index, "unique nugget")
    ranked = rerank(hits, "unique nugget", REF_DATE, index)
    assert len(ranked) == 1
    assert ranked[0].rank == 1
    assert 0.0 <= ranked[0].score <= 1.0


def test_rerank_bad_weights(corpus_index):
    hits = retrieve(corpus_index, "inflation banking")
    with pytest.raises(BadWeights):
        rerank(hits, "inflation banking", REF_DATE, corpus_index,
               {"w_bm25": 0.5, "w_title": 0.3, "w_recency": 0.1})


def test_rerank_is_permutation(corpus_index):
    answer = "inflation pressured banking during the quarter"
    hits = retrieve(corpus_index, answer, 20)
    ranked = rerank(hits, answer, REF_DATE, corpus_index)
    assert sorted(h.doc_id for h in hits) == sorted(h.doc_id for h in ranked)
    assert [h.rank for h in ranked] == list(range(1, len(ranked) + 1))
    scores = [h.score for h in ranked]
    assert scores == sorted(scores, reverse=True)


def test_monotonic_under_unrelated_doc(corpus, corpus_index):
    docs, _ = corpus
    answer = "Quorvex unveiled its hydrofoil program, a move analysts called decisive."
    before = [h.doc_id for h in retrieve(corpus_index, answer, 20)]
    unrelated = _doc("zzz-unrelated", "qqqfiller wwwfiller eeefiller rrrfiller")
    after_index = index_corpus(docs + [unrelated])
    after = [h.doc_id for h in retrieve(after_index, answer, 21)
             if h.doc_id != "zzz-unrelated"]
    assert after[:len(before)] == before


def test_attach_threshold_and_cap(corpus_index):
    from bizquery.reference_engine import ReferenceHit

    ids = sorted(corpus_index.docs)[:4]
    hits = [
        ReferenceHit(doc_id=ids[0], score=0.9, stage_scores={}, rank=1),
        ReferenceHit(doc_id=ids[1], score=0.5, stage_scores={}, rank=2),
        ReferenceHit(doc_id=ids[2], score=0.3, stage_scores={}, rank=3),
        ReferenceHit(doc_id=ids[3], score=0.1, stage_scores={}, rank=4),
    ]
    answer = Answer(kind="metric", text="x")
    got = attach_references(answer, hits, corpus_index)
    assert len(got.citations) == 3
    low = [replace(h, score=0.05) for h in hits]
    assert attach_references(answer, low, corpus_index).citations == ()


def test_attach_persona_empty(corpus_index):
    from bizquery.reference_engine import ReferenceHit

    doc_id = sorted(corpus_index.docs)[0]
    hits = [ReferenceHit(doc_id=doc_id, score=0.9, stage_scores={}, rank=1)]
    answer = Answer(kind="persona", text="hello")
    assert attach_references(answer, hits, corpus_index).citations == ()


def test_corpus_jsonl_round_trip(corpus):
    docs, _ = corpus
    text = serialize_corpus_jsonl(docs)
    again = parse_corpus_jsonl(text)
    assert again == docs
    assert corpus_fingerprint(again) == corpus_fingerprint(docs)


def test_index_save_load(tmp_path, micro_corpus):
    index = index_corpus(micro_corpus)
    path = tmp_path / "index.json"
    save_index(index, path)
    loaded = load_index(path)
    assert loaded.fingerprint == index.fingerprint
    assert loaded.postings == index.postings
    assert loaded.doc_lengths == index.doc_lengths
