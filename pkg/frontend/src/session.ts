// Per-tab session: an append-only transcript and at most one in-flight
// stream. Submitting a new query cancels the stale stream first.

import type { Answer } from "./types.js";

export interface TranscriptEntry {
  query: string;
  answer: Answer | null;
  streamedText: string;
  error: string | null;
  done: boolean;
}

export class SessionState {
  private readonly entries: TranscriptEntry[] = [];
  private pending: AbortController | null = null;

  get transcript(): readonly TranscriptEntry[] {
    return this.entries;
  }

  get activeChart() {
    for (let i = this.entries.length - 1; i >= 0; i--) {
      const spec = this.entries[i].answer?.payload?.chart_spec;
      if (spec) return spec;
    }
    return null;
  }

  /** Append a new entry and return it with the stream's abort signal. */
  begin(query: string): { entry: TranscriptEntry; signal: AbortSignal } {
    if (this.pending) {
      this.pending.abort();
    }
    this.pending = new AbortController();
    const entry: TranscriptEntry = {
      query,
      answer: null,
      streamedText: "",
      error: null,
      done: false,
    };
    this.entries.push(entry);
    return { entry, signal: this.pending.signal };
  }

  appendText(entry: TranscriptEntry, text: string): void {
    entry.streamedText += text;
  }

  complete(entry: TranscriptEntry, answer: Answer): void {
    entry.answer = answer;
    entry.done = true;
    this.pending = null;
  }

  fail(entry: TranscriptEntry, message: string): void {
    entry.error = message;
    entry.done = true;
  }
}
