/** Server-Sent Events parsing and a reconnecting stream reader.
 *
 * The server resumes from an explicit `?since=<seq>` query parameter, so
 * the parser tracks the highest delivered sequence number and reconnects
 * from there after a drop. Parsing is pure and unit-tested; the network
 * loop is a thin shell around it.
 */

import type { RmsEvent } from "./types";

export interface SseMessage {
  id: string | null;
  event: string | null;
  data: string;
}

export interface ParseResult {
  messages: SseMessage[];
  rest: string;
}

/** Split a buffer of SSE text into complete messages plus the unfinished
 * tail. Comment lines (keepalives) are dropped. */
export function parseSseBuffer(buffer: string): ParseResult {
  const messages: SseMessage[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let id: string | null = null;
    let event: string | null = null;
    const data: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith(":")) continue;
      const sep = line.indexOf(":");
      if (sep < 0) continue;
      const field = line.slice(0, sep);
      const value = line.startsWith(`${field}: `)
        ? line.slice(sep + 2)
        : line.slice(sep + 1);
      if (field === "id") id = value;
      else if (field === "event") event = value;
      else if (field === "data") data.push(value);
    }
    if (data.length > 0) messages.push({ id, event, data: data.join("\n") });
  }
  return { messages, rest };
}

/** Decode message payloads into RMS events, skipping malformed ones. */
export function decodeEvents(messages: SseMessage[]): RmsEvent[] {
  const out: RmsEvent[] = [];
  for (const m of messages) {
    try {
      const ev = JSON.parse(m.data) as RmsEvent;
      if (typeof ev.seq === "number" && typeof ev.kind === "string") out.push(ev);
    } catch {
      // tolerate garbage frames; the reducer relies on seq ordering anyway
    }
  }
  return out;
}

/** Highest sequence number seen, used for resume-after-reconnect. */
export function lastSeq(events: RmsEvent[], current: number): number {
  return events.reduce((acc, ev) => Math.max(acc, ev.seq), current);
}

export interface StreamOptions {
  /** Called with each batch of decoded events. */
  onEvents: (events: RmsEvent[]) => void;
  /** Reconnect delay in ms. */
  retryMs?: number;
  fetchFn?: typeof fetch;
}

/** Long-lived reader for /api/v1/events with since-based resume. */
export class EventStream {
  private since = 0;
  private stopped = false;
  private controller: AbortController | null = null;

  constructor(private base: string, private opts: StreamOptions) {}

  start(since = 0): void {
    this.since = since;
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    const fetchFn = this.opts.fetchFn ?? fetch;
    while (!this.stopped) {
      this.controller = new AbortController();
      try {
        const resp = await fetchFn(
          `${this.base}/api/v1/events?since=${this.since}`,
          { signal: this.controller.signal },
        );
        if (!resp.ok || !resp.body) throw new Error(`stream ${resp.status}`);
        const reader = resp.body.getReader();
        const decoder = new TextDecoder();
        let buffer = "";
        for (;;) {
          const { done, value } = await reader.read();
          if (done) break;
          buffer += decoder.decode(value, { stream: true });
          const { messages, rest } = parseSseBuffer(buffer);
          buffer = rest;
          const events = decodeEvents(messages);
          if (events.length > 0) {
            this.since = lastSeq(events, this.since);
            this.opts.onEvents(events);
          }
        }
      } catch {
        // fall through to retry
      }
      if (this.stopped) return;
      await new Promise((r) => setTimeout(r, this.opts.retryMs ?? 1000));
    }
  }
}
