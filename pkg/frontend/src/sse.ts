import type { StepEntry } from "./types.js";

export interface SseFrame {
  id: number | null;
  event: string;
  data: string;
}

/** Incremental server-sent-events parser. Push decoded text in whatever
 * chunk sizes the network delivers; complete frames come back out. A frame
 * ends at a blank line; anything after the last blank line stays buffered. */
export class SseParser {
  private buffer = "";

  push(chunk: string): SseFrame[] {
    this.buffer += chunk;
    const frames: SseFrame[] = [];
    for (;;) {
      const cut = this.buffer.search(/\r?\n\r?\n/);
      if (cut === -1) break;
      const raw = this.buffer.slice(0, cut);
      this.buffer = this.buffer.slice(cut).replace(/^\r?\n\r?\n/, "");
      const frame = parseFrame(raw);
      if (frame) frames.push(frame);
    }
    return frames;
  }
}

function parseFrame(raw: string): SseFrame | null {
  let id: number | null = null;
  let event = "message";
  const data: string[] = [];
  for (const line of raw.split(/\r?\n/)) {
    if (line.startsWith("id:")) {
      const n = Number(line.slice(3).trim());
      if (Number.isInteger(n)) id = n;
    } else if (line.startsWith("event:")) {
      event = line.slice(6).trim();
    } else if (line.startsWith("data:")) {
      data.push(line.slice(5).replace(/^ /, ""));
    }
    // comment lines (":...") and unknown fields are ignored per the format
  }
  if (data.length === 0) return null;
  return { id, event, data: data.join("\n") };
}

export interface FeedOptions {
  /** Resume after this entry id; -1 means from the beginning. */
  lastId?: number;
  signal?: AbortSignal;
  fetchImpl?: typeof fetch;
  /** Called when the connection drops and a retry is scheduled. */
  onRetry?: (attempt: number, delayMs: number) => void;
  retryDelaysMs?: number[];
}

const DEFAULT_RETRY_MS = [500, 1000, 2000, 5000];

/** Read the step feed, invoking `onEntry` once per parsed entry. Reconnects
 * on drop, resuming via Last-Event-ID so nothing is missed or repeated.
 * Resolves only when aborted. */
export async function followFeed(
  url: string,
  onEntry: (entry: StepEntry) => void,
  opts: FeedOptions = {},
): Promise<void> {
  const doFetch = opts.fetchImpl ?? fetch;
  const delays = opts.retryDelaysMs ?? DEFAULT_RETRY_MS;
  let lastId = opts.lastId ?? -1;
  let attempt = 0;

  for (;;) {
    if (opts.signal?.aborted) return;
    try {
      const resp = await doFetch(url, {
        headers: { "Last-Event-ID": String(lastId) },
        signal: opts.signal,
      });
      if (!resp.ok || !resp.body) throw new Error(`feed HTTP ${resp.status}`);
      attempt = 0;
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      const parser = new SseParser();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        for (const frame of parser.push(decoder.decode(value, { stream: true }))) {
          if (frame.event !== "step-entry") continue;
          let entry: StepEntry;
          try {
            entry = JSON.parse(frame.data) as StepEntry;
          } catch {
            continue; // never let one bad frame kill the feed
          }
          if (frame.id !== null) lastId = frame.id;
          else if (typeof entry.id === "number") lastId = entry.id;
          onEntry(entry);
        }
      }
    } catch (err) {
      if (opts.signal?.aborted) return;
    }
    if (opts.signal?.aborted) return;
    const delay = delays[Math.min(attempt, delays.length - 1)] ?? 5000;
    opts.onRetry?.(attempt, delay);
    attempt += 1;
    await sleep(delay, opts.signal);
  }
}

function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve) => {
    const t = setTimeout(done, ms);
    function done() {
      signal?.removeEventListener("abort", done);
      clearTimeout(t);
      resolve();
    }
    signal?.addEventListener("abort", done);
  });
}
