"""
Content referencing: search the answer, not the question
========================================================

The corpus is indexed once; an answer's text is searched with BM25,
candidates are re-scored by title overlap and recency, and qualifying
hits become citations on the answer.
"""

from datetime import date

from bizquery.fixtures import gen_corpus
from bizquery.reference_engine import (
    attach_references,
    index_corpus,
    rerank,
    retrieve,
)
from bizquery.responder import Answer

docs, planted = gen_corpus(seed=42)
index = index_corpus(docs)
print(f"indexed {index.doc_count} docs, avg length {index.avg_doc_length:.1f} tokens")

# every planted answer is an extracted sentence from a known source doc
pair = planted[0]
print("\nanswer text:", pair["answer"])
hits = retrieve(index, pair["answer"], n=50)
print("retrieval: top doc", hits[0].doc_id, "(expected", pair["doc_id"] + ")")

ranked = rerank(hits, pair["answer"], ref_date=date(2025, 6, 15), index=index)
top = ranked[0]
print("after rerank:", top.doc_id, "score", round(top.score, 3),
      "stages", {k: round(v, 3) for k, v in top.stage_scores.items()})

answer = Answer(kind="metric", text=pair["answer"])
cited = attach_references(answer, ranked, index)
for cite in cited.citations:
    print(f"[{cite['rank']}] {cite['title']} ({cite['score']}) {cite['url']}")

recall = sum(
    1 for p in planted
    if p["doc_id"] in [h.doc_id for h in retrieve(index, p["answer"], 50)]
)
print(f"\nplanted-pair recall@50: {recall}/{len(planted)}")
