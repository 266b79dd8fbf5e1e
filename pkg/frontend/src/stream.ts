/** Event-stream subscription with reconnect.
 *
 * One connection to /api/stream; on drop, reconnects with exponential
 * backoff and surfaces a visible "reconnecting" status so the page can
 * show it.  The EventSource constructor is injectable for tests.
 */

import { backoffDelayMs } from "./model.js";
import type { TopicEvent } from "./types.js";

export type StreamStatus = "connecting" | "live" | "reconnecting";

export interface StreamHandlers {
  onEvent: (event: TopicEvent) => void;
  onStatus?: (status: StreamStatus) => void;
}

type EventSourceFactory = (url: string) => EventSource;

export class TelemetryStream {
  private source: EventSource | null = null;
  private attempt = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;

  constructor(
    private readonly url: string,
    private readonly handlers: StreamHandlers,
    private readonly factory: EventSourceFactory = (u) => new EventSource(u),
  ) {}

  start(): void {
    this.stopped = false;
    this.connect("connecting");
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.source?.close();
    this.source = null;
  }

  private connect(status: StreamStatus): void {
    if (this.stopped) return;
    this.handlers.onStatus?.(status);
    const source = this.factory(this.url);
    this.source = source;
    source.onopen = () => {
      this.attempt = 0;
      this.handlers.onStatus?.("live");
    };
    source.onmessage = (message: MessageEvent) => {
      try {
        this.handlers.onEvent(JSON.parse(message.data as string) as TopicEvent);
      } catch {
        // Malformed frame: ignore rather than kill the stream.
      }
    };
    source.onerror = () => {
      source.close();
      if (this.stopped) return;
      const delay = backoffDelayMs(this.attempt);
      this.attempt += 1;
      this.timer = setTimeout(() => this.connect("reconnecting"), delay);
      this.handlers.onStatus?.("reconnecting");
    };
  }
}
