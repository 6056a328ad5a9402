import { describe, expect, it } from "vitest";

import { SessionState } from "../src/session.js";
import type { Answer } from "../src/types.js";

const answer: Answer = {
  kind: "metric",
  text: "x",
  boundary_note: null,
  safety: null,
  payload: null,
  citations: [],
  provenance: null,
};

describe("SessionState", () => {
  it("transcript is append-only across queries", () => {
    const session = new SessionState();
    const a = session.begin("first");
    session.complete(a.entry, answer);
    const b = session.begin("second");
    session.fail(b.entry, "network failure");
    const c = session.begin("third");
    expect(session.transcript.map((e) => e.query)).toEqual(
      ["first", "second", "third"]);
    expect(session.transcript[0].done).toBe(true);
    expect(session.transcript[1].error).toBe("network failure");
    expect(session.transcript[2].done).toBe(false);
    void c;
  });

  it("a new submit aborts the pending stream", () => {
    const session = new SessionState();
    const first = session.begin("one");
    expect(first.signal.aborted).toBe(false);
    const second = session.begin("two");
    expect(first.signal.aborted).toBe(true);
    expect(second.signal.aborted).toBe(false);
  });

  it("completion clears the pending stream (no abort on next submit)", () => {
    const session = new SessionState();
    const first = session.begin("one");
    session.complete(first.entry, answer);
    session.begin("two");
    expect(first.signal.aborted).toBe(false);
  });

  it("activeChart is the most recent chart answer", () => {
    const session = new SessionState();
    const spec = {
      version: 1, chart_type: "bar" as const, title: "t",
      x: { field: "company", label: "Company", kind: "categorical" },
      y: { field: "v", label: "V", kind: "quantitative", unit: null },
      series_field: null, rows: [],
    };
    const a = session.begin("chart please");
    session.complete(a.entry, {
      ...answer,
      kind: "chart",
      payload: { table: null, chart_spec: spec, trend: null, trend_summary: null },
    });
    const b = session.begin("metric please");
    session.complete(b.entry, answer);
    expect(session.activeChart).toEqual(spec);
  });

  it("streamed text accumulates on the entry", () => {
    const session = new SessionState();
    const { entry } = session.begin("q");
    session.appendText(entry, "Hello ");
    session.appendText(entry, "world");
    expect(entry.streamedText).toBe("Hello world");
  });
});
