// Pure ChartSpec -> SVG rendering. No DOM, no state: the same spec
// always yields the same markup, which is what the snapshot tests pin.
//
// Invariant: the console computes no metric values. Every number drawn
// comes from spec rows; the only numeric literals in this module live in
// LAYOUT (geometry) plus bare 0/1 indices.

import type { ChartSpec } from "./types.js";

export const LAYOUT = {
  width: 640,
  height: 360,
  padLeft: 150,
  padRight: 30,
  padTop: 46,
  padBottom: 34,
  barGap: 6,
  pointRadius: 4,
  fontSize: 12,
  titleSize: 14,
  labelOffset: 8,
  strokeWidth: 2,
  coordPrecision: 2,
  half: 0.5,
} as const;

const COLORS = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
                "#76b7b2", "#edc948", "#9c755f", "#bab0ac", "#17becf"];

function esc(value: unknown): string {
  return String(value)
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

function px(value: number): string {
  return value.toFixed(LAYOUT.coordPrecision);
}

function frame(spec: ChartSpec, body: string): string {
  const head =
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${LAYOUT.width} ${LAYOUT.height}" ` +
    `role="img" data-chart-type="${esc(spec.chart_type)}">` +
    `<title>${esc(spec.title)}</title>` +
    `<text x="${px(LAYOUT.padLeft)}" y="${px(LAYOUT.titleSize + LAYOUT.labelOffset)}" ` +
    `font-size="${LAYOUT.titleSize}" font-weight="bold">${esc(spec.title)}</text>`;
  return `${head}${body}</svg>`;
}

function plotArea() {
  const x0 = LAYOUT.padLeft;
  const y0 = LAYOUT.padTop;
  const x1 = LAYOUT.width - LAYOUT.padRight;
  const y1 = LAYOUT.height - LAYOUT.padBottom;
  return { x0, y0, x1, y1, w: x1 - x0, h: y1 - y0 };
}

function numbers(spec: ChartSpec, field: string): number[] {
  return spec.rows.map((row) => Number(row[field]));
}

function renderBar(spec: ChartSpec): string {
  const area = plotArea();
  const values = numbers(spec, spec.y.field);
  const top = Math.max(...values, 0);
  const n = spec.rows.length;
  const slot = area.h / Math.max(n, 1);
  const parts: string[] = [];
  parts.push(axisLabel(spec.y.label, area));
  spec.rows.forEach((row, i) => {
    const value = Number(row[spec.y.field]);
    const width = top > 0 ? (value / top) * area.w : 0;
    const y = area.y0 + i * slot;
    const barH = Math.max(slot - LAYOUT.barGap, 1);
    parts.push(
      `<rect x="${px(area.x0)}" y="${px(y)}" width="${px(Math.max(width, 0))}" ` +
      `height="${px(barH)}" fill="${COLORS[i % COLORS.length]}"></rect>`,
      `<text x="${px(area.x0 - LAYOUT.labelOffset)}" y="${px(y + barH * LAYOUT.half)}" ` +
      `font-size="${LAYOUT.fontSize}" text-anchor="end" dominant-baseline="middle">` +
      `${esc(row[spec.x.field])}</text>`,
      `<text x="${px(area.x0 + Math.max(width, 0) + LAYOUT.labelOffset)}" ` +
      `y="${px(y + barH * LAYOUT.half)}" font-size="${LAYOUT.fontSize}" ` +
      `dominant-baseline="middle">${esc(row[spec.y.field])}</text>`,
    );
  });
  return frame(spec, parts.join(""));
}

function scale(values: number[], lo: number, hi: number) {
  const min = Math.min(...values);
  const max = Math.max(...values);
  const span = max - min;
  return (v: number) => (span > 0 ? lo + ((v - min) / span) * (hi - lo) : (lo + hi) * LAYOUT.half);
}

function axisLabel(label: string, area: { x0: number; y0: number }): string {
  return `<text x="${px(area.x0)}" y="${px(area.y0 - LAYOUT.labelOffset)}" ` +
    `font-size="${LAYOUT.fontSize}" fill="#555">${esc(label)}</text>`;
}

function renderLine(spec: ChartSpec): string {
  const area = plotArea();
  const xs = numbers(spec, spec.x.field);
  const ys = numbers(spec, spec.y.field);
  const sx = scale(xs, area.x0, area.x1);
  const sy = scale(ys, area.y1, area.y0);
  const seriesField = spec.series_field;
  const groups = new Map<string, typeof spec.rows>();
  for (const row of spec.rows) {
    const key = seriesField ? String(row[seriesField]) : "";
    const bucket = groups.get(key) ?? [];
    bucket.push(row);
    groups.set(key, bucket);
  }
  const parts: string[] = [axisLabel(spec.y.label, area)];
  let colorIdx = 0;
  for (const [name, rows] of groups) {
    const points = rows
      .map((r) => `${px(sx(Number(r[spec.x.field])))},${px(sy(Number(r[spec.y.field])))}`)
      .join(" ");
    const color = COLORS[colorIdx % COLORS.length];
    colorIdx += 1;
    parts.push(
      `<polyline fill="none" stroke="${color}" stroke-width="${LAYOUT.strokeWidth}" ` +
      `points="${points}"></polyline>`,
    );
    if (name) {
      const last = rows[rows.length - 1];
      parts.push(
        `<text x="${px(sx(Number(last[spec.x.field])) + LAYOUT.labelOffset)}" ` +
        `y="${px(sy(Number(last[spec.y.field])))}" font-size="${LAYOUT.fontSize}" ` +
        `fill="${color}" dominant-baseline="middle">${esc(name)}</text>`,
      );
    }
  }
  const yearSet = [...new Set(xs)].sort((a, b) => a - b);
  for (const year of yearSet) {
    parts.push(
      `<text x="${px(sx(year))}" y="${px(area.y1 + LAYOUT.fontSize + LAYOUT.barGap)}" ` +
      `font-size="${LAYOUT.fontSize}" text-anchor="middle">${esc(year)}</text>`,
    );
  }
  return frame(spec, parts.join(""));
}

function renderScatter(spec: ChartSpec): string {
  const area = plotArea();
  const xs = numbers(spec, spec.x.field);
  const ys = numbers(spec, spec.y.field);
  const sx = scale(xs, area.x0, area.x1);
  const sy = scale(ys, area.y1, area.y0);
  const parts: string[] = [
    axisLabel(`${spec.y.label} vs ${spec.x.label}`, area),
  ];
  spec.rows.forEach((row, i) => {
    const cx = sx(Number(row[spec.x.field]));
    const cy = sy(Number(row[spec.y.field]));
    parts.push(
      `<circle cx="${px(cx)}" cy="${px(cy)}" r="${LAYOUT.pointRadius}" ` +
      `fill="${COLORS[i % COLORS.length]}"></circle>`,
    );
    const label = row["company"];
    if (label !== undefined) {
      parts.push(
        `<text x="${px(cx + LAYOUT.labelOffset)}" y="${px(cy)}" ` +
        `font-size="${LAYOUT.fontSize}" dominant-baseline="middle">${esc(label)}</text>`,
      );
    }
  });
  return frame(spec, parts.join(""));
}

/** Render any ChartSpec into standalone SVG markup. Pure. */
export function renderChartSVG(spec: ChartSpec): string {
  if (spec.chart_type === "bar") return renderBar(spec);
  if (spec.chart_type === "line") return renderLine(spec);
  if (spec.chart_type === "scatter") return renderScatter(spec);
  throw new Error(`unsupported chart type: ${String(spec.chart_type)}`);
}
