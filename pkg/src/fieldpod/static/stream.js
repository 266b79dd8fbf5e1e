/** Event-stream subscription with reconnect.
 *
 * One connection to /api/stream; on drop, reconnects with exponential
 * backoff and surfaces a visible "reconnecting" status so the page can
 * show it.  The EventSource constructor is injectable for tests.
 */
import { backoffDelayMs } from "./model.js";
export class TelemetryStream {
    constructor(url, handlers, factory = (u) => new EventSource(u)) {
        this.url = url;
        this.handlers = handlers;
        this.factory = factory;
        this.source = null;
        this.attempt = 0;
        this.timer = null;
        this.stopped = false;
    }
    start() {
        this.stopped = false;
        this.connect("connecting");
    }
    stop() {
        this.stopped = true;
        if (this.timer !== null)
            clearTimeout(this.timer);
        this.source?.close();
        this.source = null;
    }
    connect(status) {
        if (this.stopped)
            return;
        this.handlers.onStatus?.(status);
        const source = this.factory(this.url);
        this.source = source;
        source.onopen = () => {
            this.attempt = 0;
            this.handlers.onStatus?.("live");
        };
        source.onmessage = (message) => {
            try {
                this.handlers.onEvent(JSON.parse(message.data));
            }
            catch {
                // Malformed frame: ignore rather than kill the stream.
            }
        };
        source.onerror = () => {
            source.close();
            if (this.stopped)
                return;
            const delay = backoffDelayMs(this.attempt);
            this.attempt += 1;
            this.timer = setTimeout(() => this.connect("reconnecting"), delay);
            this.handlers.onStatus?.("reconnecting");
        };
    }
}
