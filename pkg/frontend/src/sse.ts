// Server-sent events subscription with an injectable source so the
// console tests run against a scripted stream instead of a server.

import type { JobEvent } from "./types.js";

export interface EventStream {
  close(): void;
  onJobUpdate(handler: (event: JobEvent) => void): void;
}

export type StreamFactory = (base: string) => EventStream;

export function browserStream(base: string): EventStream {
  const source = new EventSource(`${base}/events`);
  return {
    close: () => source.close(),
    onJobUpdate: (handler) => {
      source.addEventListener("job_update", (message) => {
        try {
          handler(JSON.parse((message as MessageEvent).data) as JobEvent);
        } catch {
          // malformed event payloads are dropped, never crash the view
        }
      });
    },
  };
}

/** Scripted stream for tests and demos: replays a fixed event list. */
export function scriptedStream(events: JobEvent[]): EventStream {
  let handler: ((event: JobEvent) => void) | null = null;
  let delivered = false;
  return {
    close: () => undefined,
    onJobUpdate: (h) => {
      handler = h;
      if (!delivered) {
        delivered = true;
        queueMicrotask(() => {
          for (const event of events) handler?.(event);
        });
      }
    },
  };
}
