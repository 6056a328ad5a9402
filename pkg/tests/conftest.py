from __future__ import annotations

from datetime import date

import pytest

from bizquery.fixtures import (
    DEFAULT_SEED,
    gen_corpus,
    gen_micro_corpus,
    gen_ranking_csv,
    write_fixture_tree,
)
from bizquery.guardrails import load_lexicons
from bizquery.metrics_store import ingest_files
from bizquery.pipeline import build_context
from bizquery.reference_engine import index_corpus

REF_DATE = date(2025, 6, 15)


@pytest.fixture(scope="session")
def ranking_csvs():
    return gen_ranking_csv(DEFAULT_SEED)


@pytest.fixture(scope="session")
def dataset(ranking_csvs):
    return ingest_files([(name, text.encode("utf-8"))
                         for name, text in sorted(ranking_csvs.items())])


@pytest.fixture(scope="session")
def catalog(dataset):
    return dataset.catalog


@pytest.fixture(scope="session")
def g500_companies(catalog):
    return sorted(c for c, info in catalog.companies.items()
                  if "g500" in info.coverage)


@pytest.fixture(scope="session")
def corpus():
    return gen_corpus(DEFAULT_SEED)


@pytest.fixture(scope="session")
def corpus_index(corpus):
    docs, _ = corpus
    return index_corpus(docs)


@pytest.fixture(scope="session")
def micro_corpus():
    return gen_micro_corpus()


@pytest.fixture(scope="session")
def lexicons():
    return load_lexicons()


@pytest.fixture(scope="session")
def fixture_tree(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixtures")
    write_fixture_tree(root, DEFAULT_SEED)
    return root


@pytest.fixture(scope="session")
def engine_ctx(fixture_tree):
    return build_context(fixture_tree / "data",
                         fixture_tree / "corpus" / "articles.jsonl",
                         REF_DATE)
