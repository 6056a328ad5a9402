import json

import pytest
from fastapi.testclient import TestClient

from bizquery.service import create_app

from conftest import REF_DATE


@pytest.fixture(scope="module")
def client(engine_ctx):
    return TestClient(create_app(engine_ctx))


def test_health(client, engine_ctx):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["dataset_fingerprint"] == engine_ctx.dataset.load_fingerprint
    assert body["index_fingerprint"] == engine_ctx.index.fingerprint


def test_health_before_load():
    unloaded = TestClient(create_app(None))
    assert unloaded.get("/health").status_code == 503
    assert unloaded.post("/v1/query", json={"query": "x"}).status_code == 503


def test_coverage(client):
    body = client.get("/v1/coverage").json()
    assert body["lists"]["g500"]["years"] == list(range(2015, 2025))
    assert body["lists"]["g500"]["cutoff_year"] == 2024
    assert "revenue" in body["metrics"]


def test_metric_query(client, g500_companies):
    r = client.post("/v1/query",
                    json={"query": f"What was {g500_companies[0]}'s revenue in 2024?"})
    assert r.status_code == 200
    body = r.json()
    assert body["kind"] == "metric"
    assert body["provenance"]["dataset_fingerprint"]
    assert body["provenance"]["index_fingerprint"]


def test_pii_prompt_422_and_executor_untouched(engine_ctx, monkeypatch):
    calls = []
    import bizquery.pipeline as pipeline_mod

    def boom(*args, **kwargs):
        calls.append(1)
        raise AssertionError("executor must not run for gated input")

    monkeypatch.setattr(pipeline_mod, "execute", boom)
    client = TestClient(create_app(engine_ctx))
    r = client.post("/v1/query",
                    json={"query": "My SSN is 123-45-6789, show me rankings"})
    assert r.status_code == 422
    body = r.json()
    assert body["kind"] == "rejection"
    assert body["safety"]["categories"] == ["pii"]
    assert calls == []


def test_malformed_body(client):
    r = client.post("/v1/query", content=b"{nope", headers={"content-type": "application/json"})
    assert r.status_code == 400
    assert client.post("/v1/query", json={"other": 1}).status_code == 400
    assert client.post("/v1/query", json={"query": "x", "ref_date": "nope"}).status_code == 400


def test_boundary_rejection_is_200(client, g500_companies):
    r = client.post("/v1/query",
                    json={"query": f"What was {g500_companies[0]}'s revenue in 2031?"})
    assert r.status_code == 200
    assert r.json()["kind"] == "rejection"


def test_trends_endpoint(client):
    r = client.get("/v1/trends", params={"topic": "inflation", "scale": "year",
                                         "from": "2019", "to": "2024"})
    assert r.status_code == 200
    assert len(r.json()["buckets"]) == 6
    assert client.get("/v1/trends", params={"topic": "inflation",
                                            "from": "2024", "to": "2019"}).status_code == 400
    assert client.get("/v1/trends", params={"scale": "year"}).status_code == 400
    assert client.get("/v1/trends", params={"topic": "x", "scale": "weekly"}).status_code == 400


def test_stream_event_order(client, g500_companies):
    trio = g500_companies[:3]
    query = f"Plot the revenue for {trio[0]}, {trio[1]} and {trio[2]} in 2024"
    events = []
    with client.stream("POST", "/v1/query",
                       json={"query": query, "stream": True}) as resp:
        assert resp.status_code == 200
        for line in resp.iter_lines():
            if line.strip():
                events.append(json.loads(line))
    kinds = [e["type"] for e in events]
    assert kinds[0] == "chunk"
    assert kinds[-1] == "done"
    assert "chart" in kinds
    assert "references" in kinds
    assert kinds.index("references") > max(i for i, k in enumerate(kinds) if k == "chunk")
    # chunk texts reassemble the full answer text
    text = "".join(e["text"] for e in events if e["type"] == "chunk")
    full = client.post("/v1/query", json={"query": query}).json()
    assert text == full["text"]


def test_stream_metric_query(client, g500_companies):
    events = []
    with client.stream("POST", "/v1/query",
                       json={"query": f"What was {g500_companies[1]}'s profits in 2023?",
                             "stream": True}) as resp:
        for line in resp.iter_lines():
            if line.strip():
                events.append(json.loads(line))
    kinds = [e["type"] for e in events]
    assert kinds[0] == "chunk" and kinds[-1] == "done"
    assert "references" in kinds


def test_ref_date_override(client, g500_companies):
    c = g500_companies[0]
    r = client.post("/v1/query", json={"query": f"What was {c}'s revenue last year?",
                                       "ref_date": "2020-06-01"})
    body = r.json()
    assert body["kind"] == "metric"
    assert body["payload"]["table"]["rows"][0][1] == 2019


def test_answers_byte_deterministic(client, g500_companies):
    payload = {"query": f"What are the top 5 companies by revenue in 2022?"}
    a = client.post("/v1/query", json=payload).content
    b = client.post("/v1/query", json=payload).content
    assert a == b


def test_load_config_env_overrides(fixture_tree, tmp_path, monkeypatch):
    from bizquery.service import load_config

    cfg_file = tmp_path / "svc.cfg"
    cfg_file.write_text(
        "[service]\n"
        f"data_dir = {fixture_tree / 'data'}\n"
        f"corpus_dir = {fixture_tree / 'corpus'}\n"
        "port = 9999\n"
        "ref_date = 2024-01-01\n"
        "[reference]\n"
        "w_bm25 = 0.5\n"
        "w_title = 0.4\n"
        "w_recency = 0.1\n"
        "[sandbox]\n"
        "max_rows_scanned = 5000\n",
        encoding="utf-8")
    cfg = load_config(cfg_file)
    assert cfg.port == 9999
    assert cfg.ref_date.year == 2024
    assert cfg.weights["w_title"] == 0.4
    assert cfg.limits.max_rows_scanned == 5000

    monkeypatch.setenv("FALM_PORT", "7777")
    monkeypatch.setenv("FALM_REF_DATE", "2023-05-05")
    cfg = load_config(cfg_file)
    assert cfg.port == 7777
    assert cfg.ref_date == __import__("datetime").date(2023, 5, 5)
