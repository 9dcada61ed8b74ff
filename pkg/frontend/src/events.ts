/**
 * Server-sent-events client for the agent's GET /events feed.
 *
 * The agent replays history from `since` and then stays live, so reconnecting
 * with `since=lastSeq` never drops or duplicates an event. On failure the
 * stream retries forever with exponential backoff; status callbacks drive the
 * "agent unreachable" banner.
 */

import type { FetchLike } from "./api.js";
import type { WebhookEvent } from "./types.js";

export type StreamStatus = "connected" | "disconnected";

export interface EventStreamOptions {
  baseUrl: string;
  apiKey?: string;
  /** Resume point: only events with seq greater than this are delivered. */
  since?: number;
  onEvent: (event: WebhookEvent) => void;
  onStatus?: (status: StreamStatus) => void;
  fetchFn?: FetchLike;
  /** Injectable backoff sleep, for tests. */
  delayFn?: (ms: number) => Promise<void>;
  baseDelayMs?: number;
  maxDelayMs?: number;
  /** Treat the connection as dead after this long without bytes (0 disables). */
  inactivityMs?: number;
}

const BASE_DELAY_MS = 1_000;
const MAX_DELAY_MS = 30_000;
const INACTIVITY_MS = 45_000;

interface SseFrame {
  event: string;
  data: string;
}

/** Incremental SSE parser: feed chunks, get complete frames. Comments are dropped. */
export class SseParser {
  private buffer = "";
  private eventName = "";
  private dataLines: string[] = [];

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    let newline: number;
    while ((newline = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, newline).replace(/\r$/, "");
      this.buffer = this.buffer.slice(newline + 1);
      if (line === "") {
        if (this.dataLines.length > 0) {
          frames.push({ event: this.eventName, data: this.dataLines.join("\n") });
        }
        this.eventName = "";
        this.dataLines = [];
      } else if (line.startsWith(":")) {
        // keep-alive comment
      } else {
        const colon = line.indexOf(":");
        const field = colon < 0 ? line : line.slice(0, colon);
        const value = colon < 0 ? "" : line.slice(colon + 1).replace(/^ /, "");
        if (field === "event") this.eventName = value;
        else if (field === "data") this.dataLines.push(value);
        // the id: field repeats the seq already present in the JSON payload
      }
    }
    return frames;
  }
}

export class EventStream {
  lastSeq: number;

  private stopped = false;
  private controller: AbortController | null = null;
  private stopRequested!: Promise<void>;
  private signalStop!: () => void;
  private readonly fetchFn: FetchLike;
  private readonly delayFn: (ms: number) => Promise<void>;

  constructor(private readonly options: EventStreamOptions) {
    this.lastSeq = options.since ?? 0;
    this.fetchFn = options.fetchFn ?? ((input, init) => fetch(input, init));
    this.delayFn =
      options.delayFn ?? ((ms) => new Promise((resolve) => setTimeout(resolve, ms)));
    this.stopRequested = new Promise((resolve) => {
      this.signalStop = resolve;
    });
  }

  start(): Promise<void> {
    return this.run();
  }

  stop(): void {
    this.stopped = true;
    this.signalStop();
    this.controller?.abort();
  }

  private async run(): Promise<void> {
    let attempt = 0;
    while (!this.stopped) {
      try {
        await this.connectOnce();
        attempt = 0; // a successful connection resets the backoff
      } catch {
        // fall through to the retry delay
      }
      if (this.stopped) break;
      this.options.onStatus?.("disconnected");
      const delay = Math.min(
        (this.options.baseDelayMs ?? BASE_DELAY_MS) * 2 ** attempt,
        this.options.maxDelayMs ?? MAX_DELAY_MS,
      );
      attempt += 1;
      await Promise.race([this.delayFn(delay), this.stopRequested]);
    }
  }

  private async connectOnce(): Promise<void> {
    this.controller = new AbortController();
    const headers: Record<string, string> = { accept: "text/event-stream" };
    if (this.options.apiKey) headers["x-api-key"] = this.options.apiKey;
    const url = `${this.options.baseUrl}/events?since=${this.lastSeq}&live=true`;
    const response = await this.fetchFn(url, {
      headers,
      signal: this.controller.signal,
    });
    if (!response.ok || !response.body) {
      throw new Error(`event stream refused: HTTP ${response.status}`);
    }
    this.options.onStatus?.("connected");
    await this.consume(response.body);
  }

  private async consume(body: ReadableStream<Uint8Array>): Promise<void> {
    const reader = body.getReader();
    const decoder = new TextDecoder();
    const parser = new SseParser();
    const inactivityMs = this.options.inactivityMs ?? INACTIVITY_MS;
    let watchdog: ReturnType<typeof setTimeout> | undefined;
    const resetWatchdog = () => {
      if (inactivityMs <= 0) return;
      clearTimeout(watchdog);
      watchdog = setTimeout(() => this.controller?.abort(), inactivityMs);
    };
    resetWatchdog();
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        resetWatchdog();
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          this.dispatch(frame);
        }
      }
    } finally {
      clearTimeout(watchdog);
      reader.releaseLock();
    }
  }

  private dispatch(frame: SseFrame): void {
    let event: WebhookEvent;
    try {
      event = JSON.parse(frame.data) as WebhookEvent;
    } catch {
      return; // not ours; ignore rather than kill the stream
    }
    if (typeof event.seq === "number" && event.seq > this.lastSeq) {
      this.lastSeq = event.seq;
    }
    this.options.onEvent(event);
  }
}
