// Interaction telemetry with short batching: events are stamped the moment
// the gesture happens and posted together shortly after, so rapid wheel
// bursts cost one request without losing per-event ticks or order.

import type { TelemetryEvent } from "./types.js";

export interface TelemetryOptions {
  flushDelayMs?: number;
  now?: () => number;
  onError?: (err: unknown) => void;
}

export class TelemetryQueue {
  private queue: TelemetryEvent[] = [];
  private timer: ReturnType<typeof setTimeout> | null = null;
  private inflight: Promise<void> = Promise.resolve();
  private readonly flushDelayMs: number;
  private readonly now: () => number;
  private readonly onError: (err: unknown) => void;
  private readonly epoch: number;
  private lastTms = 0;

  constructor(
    private readonly post: (events: TelemetryEvent[]) => Promise<unknown>,
    opts: TelemetryOptions = {},
  ) {
    this.flushDelayMs = opts.flushDelayMs ?? 50;
    this.now = opts.now ?? Date.now;
    this.onError = opts.onError ?? (() => {});
    this.epoch = this.now();
  }

  // Stamp and enqueue one event; the first event of a burst arms the flush
  // timer. t_ms is clamped non-decreasing, which the log format requires.
  emit(kind: string, payload: Record<string, unknown> = {}): TelemetryEvent {
    const t = Math.max(this.lastTms, Math.round(this.now() - this.epoch));
    this.lastTms = t;
    const event: TelemetryEvent = { t_ms: t, kind, payload };
    this.queue.push(event);
    if (this.timer === null) {
      this.timer = setTimeout(() => {
        this.timer = null;
        void this.flush();
      }, this.flushDelayMs);
    }
    return event;
  }

  get pending(): number {
    return this.queue.length;
  }

  // Post everything queued. Batches are chained so they arrive in order;
  // a failed batch goes back to the front of the queue for the next try.
  flush(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    const batch = this.queue;
    if (batch.length === 0) return this.inflight;
    this.queue = [];
    this.inflight = this.inflight.then(async () => {
      try {
        await this.post(batch);
      } catch (err) {
        this.queue = batch.concat(this.queue);
        this.onError(err);
      }
    });
    return this.inflight;
  }

  async drain(): Promise<void> {
    await this.flush();
  }
}
