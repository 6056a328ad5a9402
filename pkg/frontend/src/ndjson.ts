// Incremental NDJSON event parsing for the /v1/query stream.

import type { StreamEvent } from "./types.js";

/**
 * Stateful line assembler: feed arbitrary text chunks, get complete
 * events out. The server frames one JSON object per newline.
 */
export class NdjsonParser {
  private buffer = "";

  push(chunk: string): StreamEvent[] {
    this.buffer += chunk;
    const events: StreamEvent[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) {
        events.push(JSON.parse(line) as StreamEvent);
      }
    }
    return events;
  }

  /** Flush a trailing line without a newline (stream end). */
  finish(): StreamEvent[] {
    const rest = this.buffer.trim();
    this.buffer = "";
    return rest.length > 0 ? [JSON.parse(rest) as StreamEvent] : [];
  }
}

export function parseNdjson(text: string): StreamEvent[] {
  const parser = new NdjsonParser();
  return [...parser.push(text), ...parser.finish()];
}

/** Consume a fetch body as a stream of parsed events. */
export async function* readEvents(
  body: ReadableStream<Uint8Array>,
): AsyncGenerator<StreamEvent> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  const parser = new NdjsonParser();
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      for (const event of parser.push(decoder.decode(value, { stream: true }))) {
        yield event;
      }
    }
    for (const event of parser.finish()) {
      yield event;
    }
  } finally {
    reader.releaseLock();
  }
}
