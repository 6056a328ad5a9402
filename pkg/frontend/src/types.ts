// Wire types mirrored from the service's documented JSON schemas.

export interface ColumnDef {
  name: string;
  kind: "categorical" | "temporal" | "quantitative";
  unit: string | null;
}

export interface TableData {
  columns: ColumnDef[];
  rows: (string | number | null)[][];
  provenance?: Record<string, unknown>;
}

export interface ChartAxis {
  field: string;
  label: string;
  kind: string;
  unit?: string | null;
}

export interface ChartSpec {
  version: number;
  chart_type: "bar" | "line" | "scatter";
  title: string;
  x: ChartAxis;
  y: ChartAxis;
  series_field: string | null;
  rows: Record<string, string | number>[];
}

export interface TrendBucket {
  bucket_start: string;
  count: number;
  share: number;
}

export interface TrendSeries {
  topic_terms: string[];
  scale: string;
  window_years: number;
  buckets: TrendBucket[];
}

export interface TrendSummary {
  direction: string;
  peak_bucket: string;
  pct_change_first_to_last: number;
}

export interface Citation {
  doc_id: string;
  title: string;
  url: string;
  score: number;
  rank: number;
}

export interface AnswerPayload {
  table: TableData | null;
  chart_spec: ChartSpec | null;
  trend: TrendSeries | null;
  trend_summary: TrendSummary | null;
}

export interface Answer {
  kind: "metric" | "ranking" | "chart" | "trend" | "persona" | "rejection";
  text: string;
  boundary_note: string | null;
  safety: { decision: string; categories: string[] } | null;
  payload: AnswerPayload | null;
  citations: Citation[];
  provenance: Record<string, unknown> | null;
}

export type StreamEvent =
  | { type: "chunk"; text: string }
  | { type: "chart"; spec: ChartSpec }
  | { type: "references"; hits: Citation[] }
  | { type: "done" };

export interface CoverageSummary {
  lists: Record<string, { display_name: string; years: number[]; cutoff_year: number }>;
  company_count: number;
  metrics: string[];
  dataset_fingerprint: string;
}
