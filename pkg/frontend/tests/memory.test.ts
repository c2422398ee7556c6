import { describe, expect, it } from "vitest";
import { Pager, WARN_RATIO, gaugePercent, underPressure } from "../src/memory.js";
import type { MemoryOverview, Page } from "../src/types.js";

function overview(tokens: number, cap: number): MemoryOverview {
  return {
    working_context: "",
    queue_occupancy: { tokens, cap },
    recall_count: 0,
    archival_count: 0,
  };
}

describe("gauge", () => {
  it("maps occupancy to a percentage", () => {
    expect(gaugePercent(0, 1000)).toBe(0);
    expect(gaugePercent(250, 1000)).toBe(25);
    expect(gaugePercent(1000, 1000)).toBe(100);
  });

  it("never renders above 100 or below 0", () => {
    expect(gaugePercent(1500, 1000)).toBe(100);
    expect(gaugePercent(-5, 1000)).toBe(0);
    expect(gaugePercent(10, 0)).toBe(0);
  });

  it("raises the pressure banner at the warn ratio", () => {
    const cap = 1000;
    const atThreshold = Math.ceil(cap * WARN_RATIO);
    expect(underPressure(overview(atThreshold - 1, cap))).toBe(false);
    expect(underPressure(overview(atThreshold, cap))).toBe(true);
    expect(underPressure(overview(cap, cap))).toBe(true);
  });
});

function page<T>(items: T[], index: number, total: number, hasMore: boolean): Page<T> {
  return {
    items,
    page_index: index,
    page_size: items.length,
    total_matches: total,
    has_more: hasMore,
  };
}

describe("Pager", () => {
  it("disables next when has_more is false", () => {
    const p = new Pager<string>();
    p.start("q");
    p.accept(page(["a", "b"], 0, 2, false));
    expect(p.canNext).toBe(false);
    expect(p.nextIndex()).toBeNull();
  });

  it("enables next while has_more and prev after page 0", () => {
    const p = new Pager<string>();
    p.start("q");
    p.accept(page(["a"], 0, 3, true));
    expect(p.canNext).toBe(true);
    expect(p.canPrev).toBe(false);
    expect(p.nextIndex()).toBe(1);

    p.accept(page(["b"], 1, 3, true));
    expect(p.canPrev).toBe(true);
    expect(p.prevIndex()).toBe(0);

    p.accept(page(["c"], 2, 3, false));
    expect(p.canNext).toBe(false);
    expect(p.canPrev).toBe(true);
  });

  it("reports empty only after a response with zero matches", () => {
    const p = new Pager<string>();
    expect(p.empty).toBe(false); // nothing searched yet
    p.start("zzz");
    expect(p.empty).toBe(false); // in flight
    p.accept(page([], 0, 0, false));
    expect(p.empty).toBe(true);
  });

  it("resets paging state when a new query starts", () => {
    const p = new Pager<string>();
    p.start("one");
    p.accept(page(["x"], 4, 99, true));
    expect(p.pageIndex).toBe(4);
    p.start("two");
    expect(p.page).toBeNull();
    expect(p.pageIndex).toBe(0);
    expect(p.canNext).toBe(false);
  });
});
