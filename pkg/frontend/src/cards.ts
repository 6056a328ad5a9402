// Answer, rejection, citation, and trend panel rendering (HTML strings).
// Everything shown comes verbatim from service JSON; the only numeric
// literals here are display precisions in LAYOUT.

import { renderChartSVG } from "./chart.js";
import type { Answer, Citation, TableData, TrendSeries } from "./types.js";

export const LAYOUT = {
  sharePrecision: 3,
  scorePrecision: 3,
  trendBarUnit: 12,
  shareBarUnit: 140,
} as const;

function esc(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function tableHTML(table: TableData): string {
  const head = table.columns
    .map((c) => `<th>${esc(c.name)}${c.unit ? ` <small>(${esc(c.unit)})</small>` : ""}</th>`)
    .join("");
  const body = table.rows
    .map((row) =>
      `<tr>${row.map((cell) => `<td>${cell === null ? "n/a" : esc(cell)}</td>`).join("")}</tr>`)
    .join("");
  return `<table class="result"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function citationsHTML(citations: Citation[]): string {
  if (citations.length === 0) return "";
  const items = citations
    .map((c) =>
      `<li><a href="${esc(c.url)}" target="_blank" rel="noopener">${esc(c.title)}</a>` +
      ` <span class="score">${c.score.toFixed(LAYOUT.scorePrecision)}</span></li>`)
    .join("");
  return `<div class="citations"><h4>Sources</h4><ol>${items}</ol></div>`;
}

export function rejectionCardHTML(answer: Answer): string {
  const categories = answer.safety?.categories ?? [];
  const badges = categories
    .map((c) => `<span class="badge badge-safety">${esc(c)}</span>`)
    .join("");
  const note = answer.boundary_note
    ? `<p class="note">${esc(answer.boundary_note)}</p>`
    : "";
  const reference = answer.payload?.table
    ? `<div class="reference"><h4>Latest available data</h4>${tableHTML(answer.payload.table)}</div>`
    : "";
  return (
    `<div class="card card-rejection">` +
    `<header><span class="badge">rejected</span>${badges}</header>` +
    `<p>${esc(answer.text)}</p>${note}${reference}</div>`
  );
}

export function answerCardHTML(answer: Answer): string {
  if (answer.kind === "rejection") return rejectionCardHTML(answer);
  const note = answer.boundary_note
    ? `<p class="note">${esc(answer.boundary_note)}</p>`
    : "";
  const chart = answer.payload?.chart_spec
    ? `<figure class="chart">${renderChartSVG(answer.payload.chart_spec)}</figure>`
    : "";
  const table = answer.payload?.table ? tableHTML(answer.payload.table) : "";
  const trend = answer.payload?.trend
    ? trendPanelHTML(answer.payload.trend, "count")
    : "";
  return (
    `<div class="card card-${esc(answer.kind)}">` +
    `<header><span class="badge">${esc(answer.kind)}</span></header>` +
    `<p>${esc(answer.text)}</p>${note}${chart}${table}${trend}` +
    citationsHTML(answer.citations) +
    `</div>`
  );
}

export function errorBannerHTML(message: string): string {
  return (
    `<div class="banner banner-error"><span>${esc(message)}</span>` +
    `<button type="button" data-action="retry">Retry</button></div>`
  );
}

export function trendPanelHTML(series: TrendSeries, mode: "count" | "share"): string {
  const rows = series.buckets
    .map((b) => {
      const value = mode === "count"
        ? String(b.count)
        : b.share.toFixed(LAYOUT.sharePrecision);
      const width = mode === "count"
        ? b.count * LAYOUT.trendBarUnit
        : b.share * LAYOUT.shareBarUnit;
      return (
        `<div class="trend-row"><span class="when">${esc(b.bucket_start)}</span>` +
        `<span class="bar" style="width:${width.toFixed(0)}px"></span>` +
        `<span class="value">${esc(value)}</span></div>`
      );
    })
    .join("");
  return (
    `<div class="trend" data-scale="${esc(series.scale)}" data-mode="${esc(mode)}">` +
    `<h4>${esc(series.topic_terms.join(", "))} by ${esc(series.scale)}</h4>${rows}</div>`
  );
}
