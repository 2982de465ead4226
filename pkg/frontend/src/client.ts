// HTTP client for the notebook service. One instance per notebook session.

import { SSEParser } from "./sse.js";
import type {
  Ack,
  Command,
  Delta,
  Rejection,
  Snapshot,
  TelemetryEvent,
} from "./types.js";

export type CommandOutcome =
  | { ok: true; ack: Ack }
  | { ok: false; status: number; error: string; message: string };

export interface EventStreamHandle {
  close(): void;
  done: Promise<void>;
}

export class ServiceClient {
  private readonly fetchImpl: typeof fetch;

  constructor(
    readonly baseUrl: string,
    readonly notebookId: string,
    fetchImpl?: typeof fetch,
  ) {
    this.fetchImpl = fetchImpl ?? ((...args) => fetch(...args));
  }

  private url(path: string): string {
    return `${this.baseUrl}/nb/${encodeURIComponent(this.notebookId)}${path}`;
  }

  async snapshot(): Promise<Snapshot> {
    const res = await this.fetchImpl(this.url("/snapshot"));
    if (!res.ok) throw new Error(`snapshot failed: HTTP ${res.status}`);
    return (await res.json()) as Snapshot;
  }

  // 200 and 409 (duplicate client_seq, already applied) both count as ok;
  // 400 carries the engine's rejection, nothing was applied.
  async command(cmd: Command & { client_seq: number }): Promise<CommandOutcome> {
    const res = await this.fetchImpl(this.url("/command"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(cmd),
    });
    if (res.status === 200 || res.status === 409) {
      return { ok: true, ack: (await res.json()) as Ack };
    }
    const body = (await res.json().catch(() => ({}))) as Partial<Rejection> & {
      detail?: unknown;
    };
    return {
      ok: false,
      status: res.status,
      error: body.error ?? "HTTPError",
      message:
        body.message ??
        (body.detail !== undefined ? JSON.stringify(body.detail) : `HTTP ${res.status}`),
    };
  }

  // Live delta stream starting strictly after `after`. The returned handle
  // closes the connection; `done` settles when the stream ends for any
  // reason other than close(), in which case onDrop has been called.
  openEvents(
    after: number,
    onDelta: (delta: Delta) => void,
    onDrop: (err: unknown) => void = () => {},
  ): EventStreamHandle {
    const ctl = new AbortController();
    let closed = false;
    const done = (async () => {
      const res = await this.fetchImpl(this.url(`/events?after=${after}`), {
        signal: ctl.signal,
        headers: { accept: "text/event-stream" },
      });
      if (!res.ok || !res.body) {
        throw new Error(`event stream failed: HTTP ${res.status}`);
      }
      const reader = res.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SSEParser();
      for (;;) {
        const { done: eof, value } = await reader.read();
        if (eof) break;
        for (const frame of parser.feed(decoder.decode(value, { stream: true }))) {
          if (frame.event === "delta") onDelta(JSON.parse(frame.data) as Delta);
        }
      }
      if (!closed) throw new Error("event stream ended");
    })().catch((err: unknown) => {
      if (!closed) onDrop(err);
    });
    return {
      done,
      close() {
        closed = true;
        ctl.abort();
      },
    };
  }

  async postTelemetry(events: TelemetryEvent[]): Promise<number> {
    const res = await this.fetchImpl(this.url("/telemetry"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ events }),
    });
    const body = (await res.json()) as { count?: number } & Partial<Rejection>;
    if (!res.ok) {
      throw new Error(`telemetry rejected: ${body.error}: ${body.message}`);
    }
    return body.count ?? 0;
  }

  async getTelemetry(): Promise<TelemetryEvent[]> {
    const res = await this.fetchImpl(this.url("/telemetry"));
    if (!res.ok) throw new Error(`telemetry read failed: HTTP ${res.status}`);
    const body = (await res.json()) as { events: TelemetryEvent[] };
    return body.events;
  }

  async results(format: "csv" | "json"): Promise<string> {
    const res = await this.fetchImpl(this.url(`/results?format=${format}`));
    if (!res.ok) throw new Error(`results failed: HTTP ${res.status}`);
    return res.text();
  }
}
