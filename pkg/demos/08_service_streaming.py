"""
The streaming HTTP service
==========================

Runs the service in-process, then exercises the endpoints with plain
urllib: a normal answer, a PII rejection (422), the NDJSON stream (text
chunks arrive before the references event), and the trends endpoint.
"""

import json
import tempfile
import threading
import time
import urllib.error
import urllib.request
from datetime import date

import uvicorn

from bizquery.fixtures import write_fixture_tree
from bizquery.pipeline import build_context
from bizquery.service import create_app

tmp = tempfile.mkdtemp()
write_fixture_tree(tmp, 42)
ctx = build_context(f"{tmp}/data", f"{tmp}/corpus/articles.jsonl", date(2025, 6, 15))
app = create_app(ctx)

PORT = 8642
server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=PORT,
                                       log_level="error"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)
BASE = f"http://127.0.0.1:{PORT}"


def post(payload):
    req = urllib.request.Request(f"{BASE}/v1/query",
                                 data=json.dumps(payload).encode(),
                                 headers={"content-type": "application/json"})
    return urllib.request.urlopen(req)


print("health:", json.load(urllib.request.urlopen(f"{BASE}/health"))["status"])

company = sorted(ctx.dataset.catalog.companies)[0]
body = json.load(post({"query": f"What was {company}'s revenue in 2024?"}))
print("answer:", body["text"])
print("fingerprints recorded:", bool(body["provenance"]["dataset_fingerprint"]))

try:
    post({"query": "My SSN is 123-45-6789, list the rankings"})
except urllib.error.HTTPError as err:
    print("PII prompt ->", err.code, json.load(err)["kind"])

print("\nstreamed chart query:")
with post({"query": f"Plot the revenue for {company} in 2024", "stream": True}) as resp:
    for raw in resp:
        event = json.loads(raw)
        print("  event:", event["type"],
              f"({event['text']!r})" if event["type"] == "chunk" else "")

trends = json.load(urllib.request.urlopen(
    f"{BASE}/v1/trends?topic=inflation&scale=year&from=2019&to=2024"))
print("\ntrend buckets:", [(b["bucket_start"][:4], b["count"]) for b in trends["buckets"]])

server.should_exit = True
thread.join(timeout=5)
print("server stopped")
