// Rejection and citation cards render from recorded Answer JSON with no
// network anywhere in the path.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  answerCardHTML,
  citationsHTML,
  rejectionCardHTML,
  tableHTML,
  trendPanelHTML,
} from "../src/cards.js";
import type { Answer, TrendSeries } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function loadAnswer(name: string): Answer {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8"));
}

describe("rejection cards", () => {
  it("safety rejection shows categories and never echoes the prompt", () => {
    const answer = loadAnswer("answer_rejection_safety");
    const html = rejectionCardHTML(answer);
    expect(html).toContain("badge-safety");
    expect(html).toContain("pii");
    expect(html).not.toContain("123-45-6789");
    expect(html).toMatchSnapshot();
  });

  it("boundary rejection shows the latest-reference table and note", () => {
    const answer = loadAnswer("answer_rejection_latest");
    const html = rejectionCardHTML(answer);
    expect(html).toContain("Latest available data");
    expect(html).toContain("2024");
    expect(html).toContain(answer.boundary_note as string);
    expect(html).toMatchSnapshot();
  });

  it("answerCardHTML routes rejection answers to the rejection card", () => {
    const answer = loadAnswer("answer_rejection_latest");
    expect(answerCardHTML(answer)).toBe(rejectionCardHTML(answer));
  });
});

describe("answer cards", () => {
  it("metric answer renders text, payload table, and citations", () => {
    const answer = loadAnswer("answer_metric");
    const html = answerCardHTML(answer);
    expect(html).toContain(answer.text);
    expect(html).toContain("<table");
    for (const cite of answer.citations) {
      expect(html).toContain(`href="${cite.url}"`);
      expect(html).toContain(cite.title);
    }
    expect(html).toMatchSnapshot();
  });

  it("redirect ranking answer carries its boundary note", () => {
    const answer = loadAnswer("answer_ranking_redirect");
    const html = answerCardHTML(answer);
    expect(html).toContain("closest available list");
    expect(html).toMatchSnapshot();
  });

  it("citations list is empty markup when there are none", () => {
    expect(citationsHTML([])).toBe("");
  });

  it("table cells render missing values as n/a", () => {
    const html = tableHTML({
      columns: [{ name: "company", kind: "categorical", unit: null },
                { name: "eps", kind: "quantitative", unit: "usd_per_share" }],
      rows: [["Acme", null]],
    });
    expect(html).toContain("n/a");
  });

  it("escapes markup in service strings", () => {
    const answer = loadAnswer("answer_metric");
    const tampered = { ...answer, text: "<script>alert('x')</script>" };
    expect(answerCardHTML(tampered)).not.toContain("<script>");
  });
});

describe("trend panel", () => {
  const series: TrendSeries = JSON.parse(
    readFileSync(join(FIXTURES, "trend_inflation.json"), "utf-8"));

  it("renders one row per bucket in count mode", () => {
    const html = trendPanelHTML(series, "count");
    expect((html.match(/trend-row/g) ?? []).length).toBe(series.buckets.length);
    for (const bucket of series.buckets) {
      expect(html).toContain(String(bucket.count));
    }
    expect(html).toMatchSnapshot();
  });

  it("share mode displays the service-computed shares", () => {
    const html = trendPanelHTML(series, "share");
    expect(html).toContain('data-mode="share"');
    expect(html).toContain(series.buckets[0].share.toFixed(3));
  });
});
