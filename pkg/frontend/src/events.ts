// Session event stream over SSE, with resume + exponential backoff.

import type { EngineEvent } from './types.js';

// Minimal slice of EventSource the stream needs, so tests can fake it.
export interface SourceLike {
  addEventListener(name: string, handler: (event: { data: string }) => void): void;
  close(): void;
  onerror: ((event: unknown) => void) | null;
}

export type SourceFactory = (url: string) => SourceLike;
export type Scheduler = (fn: () => void, delayMs: number) => void;

const NAMED_EVENTS = [
  'session_started',
  'instruction_accepted',
  'result_scored',
  'finished',
];

export class EventStream {
  lastSeq = 0;
  private source: SourceLike | null = null;
  private stopped = false;
  private backoffMs = 500;

  constructor(
    private urlFor: (since: number) => string,
    private onEvent: (event: EngineEvent) => void,
    private onStatus: (connected: boolean) => void = () => {},
    private makeSource: SourceFactory = (url) => new EventSource(url) as unknown as SourceLike,
    private schedule: Scheduler = (fn, ms) => setTimeout(fn, ms),
  ) {}

  start(): void {
    this.stopped = false;
    this.connect();
  }

  stop(): void {
    this.stopped = true;
    this.source?.close();
    this.source = null;
  }

  private connect(): void {
    if (this.stopped) return;
    const source = this.makeSource(this.urlFor(this.lastSeq));
    this.source = source;
    this.onStatus(true);

    const deliver = (event: { data: string }) => {
      const parsed = JSON.parse(event.data) as EngineEvent;
      this.lastSeq = parsed.seq;
      this.backoffMs = 500; // healthy traffic resets the retry clock
      this.onEvent(parsed);
    };
    for (const name of NAMED_EVENTS) source.addEventListener(name, deliver);
    source.addEventListener('stream_end', () => {
      this.stopped = true;
      source.close();
      this.onStatus(false);
    });

    source.onerror = () => {
      source.close();
      if (this.stopped) return;
      this.onStatus(false);
      const delay = this.backoffMs;
      this.backoffMs = Math.min(this.backoffMs * 2, 8000);
      this.schedule(() => this.connect(), delay);
    };
  }
}
