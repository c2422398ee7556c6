import type { ArchivalItem, MemoryOverview, RecallItem } from "./types.js";
import type { Row } from "./transcript.js";
import { Pager } from "./memory.js";
import { gaugePercent, underPressure } from "./memory.js";

// Plain-DOM rendering. Every function repaints its region from state; no
// incremental patching, transcripts at human scale do not need it.

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const ROW_LABEL: Record<Row["kind"], string> = {
  user: "you",
  agent: "agent",
  monologue: "monologue",
  function_call: "call",
  function_result: "result",
  error: "error",
  note: "note",
};

export function renderTranscript(root: HTMLElement, rows: Row[]): void {
  root.replaceChildren();
  for (const row of rows) {
    const div = el("div", `row row-${row.kind}${row.pending ? " row-pending" : ""}`);
    div.append(el("span", "row-label", ROW_LABEL[row.kind]));
    const body = el("span", "row-text", row.text);
    div.append(body);
    if (row.detail) {
      const detail = el("pre", "row-detail", row.detail);
      div.append(detail);
    }
    root.append(div);
  }
  root.scrollTop = root.scrollHeight;
}

export function renderMemoryPanel(
  panel: {
    working: HTMLElement;
    gaugeFill: HTMLElement;
    gaugeText: HTMLElement;
    pressure: HTMLElement;
    counts: HTMLElement;
  },
  m: MemoryOverview,
): void {
  panel.working.textContent = m.working_context;
  const pct = gaugePercent(m.queue_occupancy.tokens, m.queue_occupancy.cap);
  panel.gaugeFill.style.width = `${pct}%`;
  panel.gaugeFill.classList.toggle("gauge-hot", underPressure(m));
  panel.gaugeText.textContent =
    `${m.queue_occupancy.tokens} / ${m.queue_occupancy.cap} tokens`;
  panel.pressure.hidden = !underPressure(m);
  panel.counts.textContent =
    `recall ${m.recall_count} · archival ${m.archival_count}`;
}

export interface SearchEls {
  results: HTMLElement;
  prev: HTMLButtonElement;
  next: HTMLButtonElement;
  status: HTMLElement;
}

export function renderRecallResults(els: SearchEls, pager: Pager<RecallItem>): void {
  renderResults(els, pager, (item) =>
    `[${item.timestamp}] ${item.role}: ${item.text}`);
}

export function renderArchivalResults(els: SearchEls, pager: Pager<ArchivalItem>): void {
  renderResults(els, pager, (item) =>
    `(${item.score.toFixed(3)}) ${item.text}`);
}

function renderResults<T>(
  els: SearchEls, pager: Pager<T>, line: (item: T) => string,
): void {
  els.results.replaceChildren();
  els.prev.disabled = !pager.canPrev;
  els.next.disabled = !pager.canNext;
  if (pager.page === null) {
    els.status.textContent = "";
    return;
  }
  if (pager.empty) {
    els.status.textContent = "no matches";
    return;
  }
  const p = pager.page;
  els.status.textContent =
    `page ${p.page_index + 1} · ${p.total_matches} match${p.total_matches === 1 ? "" : "es"}`;
  for (const item of p.items) {
    els.results.append(el("div", "result-line", line(item)));
  }
}

export function showBanner(node: HTMLElement, text: string): void {
  node.textContent = text;
  node.hidden = false;
}

export function hideBanner(node: HTMLElement): void {
  node.hidden = true;
}
