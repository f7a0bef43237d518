import { Mode } from "./config.js";
import { Verdict } from "./detection.js";

/** Wire-format event; field names are the service contract. */
export interface WireEvent {
  v: 1;
  user_id: string;
  site: string;
  link: Verdict;
  event: EventKind;
  cond: Mode;
  ts: string;
}

export type EventKind =
  | "page_load"
  | "optout_native"
  | "optout_banner"
  | "optout_menu"
  | "banner_closed"
  | "banner_disabled";

export function nowRfc3339(): string {
  return new Date().toISOString();
}

export function makeEvent(
  userId: string,
  site: string,
  link: Verdict,
  event: EventKind,
  cond: Mode,
  ts?: string,
): WireEvent {
  return { v: 1, user_id: userId, site, link, event, cond, ts: ts ?? nowRfc3339() };
}

export type FetchLike = (url: string, init: RequestInit) => Promise<{ ok: boolean; status: number }>;

export interface TelemetryOptions {
  fetchFn?: FetchLike;
  retryDelayMs?: number;
  maxRetryDelayMs?: number;
  scheduler?: (fn: () => void, ms: number) => void;
}

/**
 * At-least-once delivery: events queue locally and flush in batches to
 * POST /v1/events. A failed flush keeps the batch queued and schedules
 * a retry with exponential backoff; the service deduplicates exact
 * redeliveries, so retrying a partially acknowledged batch is safe.
 */
export class TelemetryQueue {
  private queue: WireEvent[] = [];
  private fetchFn: FetchLike;
  private retryDelayMs: number;
  private maxRetryDelayMs: number;
  private currentDelayMs: number;
  private scheduler: (fn: () => void, ms: number) => void;
  private retryScheduled = false;
  private chain: Promise<boolean> = Promise.resolve(true);
  sentBatches: number = 0;

  constructor(private endpoint: string, options: TelemetryOptions = {}) {
    this.fetchFn = options.fetchFn ?? ((url, init) => fetch(url, init));
    this.retryDelayMs = options.retryDelayMs ?? 1_000;
    this.maxRetryDelayMs = options.maxRetryDelayMs ?? 60_000;
    this.currentDelayMs = this.retryDelayMs;
    this.scheduler = options.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
  }

  get pending(): readonly WireEvent[] {
    return this.queue;
  }

  record(event: WireEvent): void {
    this.queue.push(event);
  }

  /**
   * Push the whole queue; resolves true when the service acknowledged.
   * Flushes are serialized so an overlapping call cannot double-post
   * the same batch.
   */
  flush(): Promise<boolean> {
    this.chain = this.chain.then(() => this.flushNow(), () => this.flushNow());
    return this.chain;
  }

  private async flushNow(): Promise<boolean> {
    if (this.queue.length === 0) return true;
    const batch = this.queue.slice();
    let ok = false;
    try {
      const response = await this.fetchFn(`${this.endpoint}/v1/events`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(batch),
      });
      ok = response.ok;
    } catch {
      ok = false;
    }
    if (ok) {
      this.queue.splice(0, batch.length);
      this.sentBatches += 1;
      this.currentDelayMs = this.retryDelayMs;
      return true;
    }
    this.scheduleRetry();
    return false;
  }

  private scheduleRetry(): void {
    if (this.retryScheduled) return;
    this.retryScheduled = true;
    const delay = this.currentDelayMs;
    this.currentDelayMs = Math.min(this.currentDelayMs * 2, this.maxRetryDelayMs);
    this.scheduler(() => {
      this.retryScheduled = false;
      void this.flush();
    }, delay);
  }

  async recordAndFlush(event: WireEvent): Promise<boolean> {
    this.record(event);
    return this.flush();
  }
}
