// Service client: query submission (streamed and plain), trends, coverage.

import { readEvents } from "./ndjson.js";
import type {
  Answer,
  ChartSpec,
  Citation,
  CoverageSummary,
  StreamEvent,
  TrendSeries,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    readonly retriable: boolean,
    readonly status: number | null = null,
    readonly answer: Answer | null = null,
  ) {
    super(message);
  }
}

export interface ClientOptions {
  baseUrl?: string;
  fetchImpl?: typeof fetch;
}

function impl(opts: ClientOptions): typeof fetch {
  return opts.fetchImpl ?? fetch;
}

function base(opts: ClientOptions): string {
  return (opts.baseUrl ?? "").replace(/\/$/, "");
}

async function postQuery(
  text: string,
  stream: boolean,
  opts: ClientOptions,
  signal?: AbortSignal,
): Promise<Response> {
  let response: Response;
  try {
    response = await impl(opts)(`${base(opts)}/v1/query`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ query: text, stream }),
      signal,
    });
  } catch (err) {
    if ((err as Error).name === "AbortError") throw err;
    throw new ServiceError(`network failure: ${(err as Error).message}`, true);
  }
  if (response.status === 422) {
    // guardrail rejection: the body is a full rejection Answer
    const answer = (await response.json()) as Answer;
    throw new ServiceError("request rejected by guardrails", false,
                           response.status, answer);
  }
  if (!response.ok) {
    throw new ServiceError(`service error ${response.status}`,
                           response.status >= 500, response.status);
  }
  return response;
}

/** Non-streaming query: the complete Answer. */
export async function queryOnce(
  text: string,
  opts: ClientOptions = {},
): Promise<Answer> {
  const response = await postQuery(text, false, opts);
  return (await response.json()) as Answer;
}

export interface StreamHandlers {
  onChunk?: (text: string) => void;
  onChart?: (spec: ChartSpec) => void;
  onReferences?: (hits: Citation[]) => void;
}

/**
 * Streaming query: forwards events as they arrive and assembles the
 * final client-side Answer from them.
 */
export async function submitQuery(
  text: string,
  handlers: StreamHandlers,
  opts: ClientOptions = {},
  signal?: AbortSignal,
): Promise<Answer> {
  const response = await postQuery(text, true, opts, signal);
  if (!response.body) {
    throw new ServiceError("response has no body stream", true);
  }
  let assembled = "";
  let chart: ChartSpec | null = null;
  let citations: Citation[] = [];
  for await (const event of readEvents(response.body) as AsyncGenerator<StreamEvent>) {
    if (event.type === "chunk") {
      assembled += event.text;
      handlers.onChunk?.(event.text);
    } else if (event.type === "chart") {
      chart = event.spec;
      handlers.onChart?.(event.spec);
    } else if (event.type === "references") {
      citations = event.hits;
      handlers.onReferences?.(event.hits);
    }
  }
  return {
    kind: chart ? "chart" : "metric",
    text: assembled,
    boundary_note: null,
    safety: null,
    payload: chart
      ? { table: null, chart_spec: chart, trend: null, trend_summary: null }
      : null,
    citations,
    provenance: null,
  };
}

export async function fetchTrends(
  topic: string,
  scale: string,
  from: string,
  to: string,
  opts: ClientOptions = {},
): Promise<TrendSeries> {
  const params = new URLSearchParams({ topic, scale, from, to });
  const response = await impl(opts)(`${base(opts)}/v1/trends?${params}`);
  if (!response.ok) {
    const body = (await response.json().catch(() => ({}))) as { error?: string };
    throw new ServiceError(body.error ?? `trends error ${response.status}`,
                           false, response.status);
  }
  return (await response.json()) as TrendSeries;
}

export async function fetchCoverage(
  opts: ClientOptions = {},
): Promise<CoverageSummary> {
  const response = await impl(opts)(`${base(opts)}/v1/coverage`);
  if (!response.ok) {
    throw new ServiceError(`coverage error ${response.status}`, true,
                           response.status);
  }
  return (await response.json()) as CoverageSummary;
}

export async function health(opts: ClientOptions = {}): Promise<boolean> {
  try {
    const response = await impl(opts)(`${base(opts)}/health`);
    return response.ok;
  } catch {
    return false;
  }
}
