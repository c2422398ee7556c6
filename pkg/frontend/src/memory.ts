import type { MemoryOverview, Page } from "./types.js";

// Mirrors the runtime's default pressure threshold so the human sees the
// banner at the same occupancy the processor gets its warning.
export const WARN_RATIO = 0.75;

/** Gauge fill as a 0..100 percentage. Never above 100 even if a response
 * briefly reports tokens over cap. */
export function gaugePercent(tokens: number, cap: number): number {
  if (cap <= 0) return 0;
  return Math.min(100, Math.max(0, (tokens / cap) * 100));
}

export function underPressure(m: MemoryOverview, warnRatio = WARN_RATIO): boolean {
  const { tokens, cap } = m.queue_occupancy;
  return cap > 0 && tokens / cap >= warnRatio;
}

/** Paging state for one search box. Holds the query and the last page so
 * the view can decide which controls are live. */
export class Pager<T> {
  query = "";
  page: Page<T> | null = null;

  get pageIndex(): number {
    return this.page?.page_index ?? 0;
  }

  get canPrev(): boolean {
    return this.pageIndex > 0;
  }

  get canNext(): boolean {
    return this.page?.has_more ?? false;
  }

  /** Page index a "next" click should request; null when exhausted. */
  nextIndex(): number | null {
    return this.canNext ? this.pageIndex + 1 : null;
  }

  prevIndex(): number | null {
    return this.canPrev ? this.pageIndex - 1 : null;
  }

  start(query: string): void {
    this.query = query;
    this.page = null;
  }

  accept(page: Page<T>): void {
    this.page = page;
  }

  get empty(): boolean {
    return this.page !== null && this.page.total_matches === 0;
  }
}
