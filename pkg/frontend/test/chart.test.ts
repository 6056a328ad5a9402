import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { renderChartSVG } from "../src/chart.js";
import type { ChartSpec } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function loadSpec(name: string): ChartSpec {
  return JSON.parse(readFileSync(join(FIXTURES, `chartspec_${name}.json`), "utf-8"));
}

describe("renderChartSVG", () => {
  for (const kind of ["bar", "line", "scatter"] as const) {
    it(`renders the golden ${kind} spec to a stable snapshot`, () => {
      const spec = loadSpec(kind);
      const svg = renderChartSVG(spec);
      expect(svg.startsWith("<svg")).toBe(true);
      expect(svg).toContain(`data-chart-type="${kind}"`);
      expect(svg).toMatchSnapshot();
    });

    it(`${kind} rendering is a pure function of the spec`, () => {
      const spec = loadSpec(kind);
      expect(renderChartSVG(spec)).toBe(renderChartSVG(spec));
    });
  }

  it("bar chart draws one rect per row with the row's label and value", () => {
    const spec = loadSpec("bar");
    const svg = renderChartSVG(spec);
    const rects = svg.match(/<rect /g) ?? [];
    expect(rects.length).toBe(spec.rows.length);
    for (const row of spec.rows) {
      expect(svg).toContain(String(row[spec.x.field]));
      expect(svg).toContain(String(row[spec.y.field]));
    }
  });

  it("line chart labels series when a series field is present", () => {
    const spec = loadSpec("line");
    const svg = renderChartSVG(spec);
    const lines = svg.match(/<polyline /g) ?? [];
    const seriesCount = spec.series_field
      ? new Set(spec.rows.map((r) => r[spec.series_field as string])).size
      : 1;
    expect(lines.length).toBe(seriesCount);
  });

  it("scatter chart draws one point per row", () => {
    const spec = loadSpec("scatter");
    const svg = renderChartSVG(spec);
    const points = svg.match(/<circle /g) ?? [];
    expect(points.length).toBe(spec.rows.length);
  });

  it("rejects unknown chart types", () => {
    const spec = { ...loadSpec("bar"), chart_type: "pie" } as unknown as ChartSpec;
    expect(() => renderChartSVG(spec)).toThrow(/unsupported/);
  });
});

describe("no-computed-values invariant", () => {
  // Rendering code may carry geometry constants (inside a LAYOUT block)
  // and bare 0/1 indices, but no other numeric literals: every displayed
  // number must originate in service JSON.
  for (const file of ["chart.ts", "cards.ts"]) {
    it(`${file} has no numeric literals outside LAYOUT`, () => {
      const source = readFileSync(join(__dirname, "..", "src", file), "utf-8");
      const withoutLayout = source.replace(
        /export const LAYOUT = \{[^}]*\} as const;/s, "");
      const withoutColors = withoutLayout.replace(/"#[0-9a-f]{6}"/g, '"#"');
      const withoutStrings = withoutColors.replace(/`[^`]*`/gs, "``");
      const literals = (withoutStrings.match(/(?<![\w.])\d+(?:\.\d+)?/g) ?? [])
        .filter((n) => n !== "0" && n !== "1");
      expect(literals).toEqual([]);
    });
  }
});
