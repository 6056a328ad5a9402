// Client behavior against mocked fetch: stream assembly, guardrail 422
// answers, retriable network failures. No real network.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { ServiceError, fetchTrends, queryOnce, submitQuery } from "../src/api.js";

const FIXTURES = join(__dirname, "fixtures");
const recordedStream = readFileSync(join(FIXTURES, "stream_chart.ndjson"), "utf-8");
const rejectionBody = readFileSync(join(FIXTURES, "answer_rejection_safety.json"), "utf-8");
const metricBody = readFileSync(join(FIXTURES, "answer_metric.json"), "utf-8");

function streamResponse(text: string): Response {
  const encoder = new TextEncoder();
  const body = new ReadableStream<Uint8Array>({
    start(controller) {
      for (let i = 0; i < text.length; i += 17) {
        controller.enqueue(encoder.encode(text.slice(i, i + 17)));
      }
      controller.close();
    },
  });
  return new Response(body, {
    status: 200,
    headers: { "content-type": "application/x-ndjson" },
  });
}

describe("submitQuery", () => {
  it("assembles text, chart, and citations from the stream", async () => {
    const chunks: string[] = [];
    let chartSeen = false;
    const answer = await submitQuery(
      "plot something",
      {
        onChunk: (t) => chunks.push(t),
        onChart: () => { chartSeen = true; },
      },
      { fetchImpl: async () => streamResponse(recordedStream) },
    );
    expect(chartSeen).toBe(true);
    expect(answer.kind).toBe("chart");
    expect(answer.text).toBe(chunks.join(""));
    expect(answer.payload?.chart_spec?.chart_type).toBe("bar");
  });

  it("surfaces a guardrail 422 as a non-retriable error with the answer", async () => {
    const fetchImpl = async () =>
      new Response(rejectionBody, { status: 422,
                                    headers: { "content-type": "application/json" } });
    try {
      await submitQuery("bad", {}, { fetchImpl });
      expect.unreachable();
    } catch (err) {
      const failure = err as ServiceError;
      expect(failure).toBeInstanceOf(ServiceError);
      expect(failure.retriable).toBe(false);
      expect(failure.answer?.kind).toBe("rejection");
      expect(failure.answer?.safety?.categories).toContain("pii");
    }
  });

  it("wraps network failures as retriable errors", async () => {
    const fetchImpl = async () => {
      throw new TypeError("fetch failed");
    };
    await expect(submitQuery("x", {}, { fetchImpl }))
      .rejects.toMatchObject({ retriable: true });
  });
});

describe("queryOnce", () => {
  it("returns the complete answer body", async () => {
    const fetchImpl = async () =>
      new Response(metricBody, { status: 200,
                                 headers: { "content-type": "application/json" } });
    const answer = await queryOnce("q", { fetchImpl });
    expect(answer.kind).toBe("metric");
    expect(answer.payload?.table?.rows.length).toBeGreaterThan(0);
  });
});

describe("fetchTrends", () => {
  it("propagates service 400s with their message", async () => {
    const fetchImpl = async () =>
      new Response(JSON.stringify({ error: "empty range" }), { status: 400 });
    await expect(fetchTrends("x", "year", "2024", "2019", { fetchImpl }))
      .rejects.toThrow(/empty range/);
  });
});
