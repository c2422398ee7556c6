import { ApiClient, HttpError } from "./api.js";
import { followFeed } from "./sse.js";
import { Transcript } from "./transcript.js";
import { Pager } from "./memory.js";
import {
  hideBanner,
  renderArchivalResults,
  renderMemoryPanel,
  renderRecallResults,
  renderTranscript,
  showBanner,
  type SearchEls,
} from "./view.js";
import type { ArchivalItem, RecallItem } from "./types.js";

const DEBUG_KEY = "tiermem.debug";

function $(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const params = new URLSearchParams(location.search);

  let agentId = params.get("agent");
  if (!agentId) {
    const existing = await api.listAgents();
    agentId = existing[0]?.agent_id ??
      (await api.createAgent("chat")).agent_id;
    params.set("agent", agentId);
    history.replaceState(null, "", `?${params}`);
  }
  $("agent-id").textContent = agentId;

  const transcript = new Transcript();
  let debug = false;
  try {
    debug = localStorage.getItem(DEBUG_KEY) === "1";
  } catch {
    // storage can be unavailable; default stays off
  }

  const transcriptEl = $("transcript");
  const debugToggle = $("debug-toggle") as HTMLInputElement;
  debugToggle.checked = debug;
  const repaint = () => renderTranscript(transcriptEl, transcript.visible(debug));

  debugToggle.addEventListener("change", () => {
    debug = debugToggle.checked;
    try {
      localStorage.setItem(DEBUG_KEY, debug ? "1" : "0");
    } catch {
      // best effort only
    }
    repaint();
  });

  // ---- memory panel ----
  const panelEls = {
    working: $("working-context"),
    gaugeFill: $("gauge-fill"),
    gaugeText: $("gauge-text"),
    pressure: $("pressure-banner"),
    counts: $("store-counts"),
  };
  const refreshMemory = async () => {
    renderMemoryPanel(panelEls, await api.getMemory(agentId!));
  };

  const recallPager = new Pager<RecallItem>();
  const archivalPager = new Pager<ArchivalItem>();
  wireSearch(
    "recall", recallPager,
    (q, page) => api.searchRecall(agentId!, q, page),
    (els) => renderRecallResults(els, recallPager),
  );
  wireSearch(
    "archival", archivalPager,
    (q, page) => api.searchArchival(agentId!, q, page),
    (els) => renderArchivalResults(els, archivalPager),
  );

  // ---- composer ----
  const input = $("composer-input") as HTMLInputElement;
  const sendBtn = $("composer-send") as HTMLButtonElement;
  const errorBanner = $("error-banner");
  const syncSendDisabled = () => {
    sendBtn.disabled = input.value.trim() === "";
  };
  input.addEventListener("input", syncSendDisabled);
  syncSendDisabled();

  const send = async () => {
    const text = input.value.trim();
    if (!text) return;
    const pending = transcript.addPending(text);
    input.value = "";
    syncSendDisabled();
    repaint();
    try {
      await api.sendMessage(agentId!, text);
      hideBanner(errorBanner);
      await refreshMemory();
    } catch (err) {
      // put the text back so a retry is one click away
      transcript.dropPending(pending);
      input.value = text;
      syncSendDisabled();
      repaint();
      const detail = err instanceof HttpError ? err.message : "network failure";
      showBanner(errorBanner, `send failed: ${detail} — press send to retry`);
    }
  };
  sendBtn.addEventListener("click", send);
  input.addEventListener("keydown", (e) => {
    if (e.key === "Enter") void send();
  });

  // ---- live feed ----
  const feedBanner = $("feed-banner");
  void followFeed(
    api.streamUrl(agentId),
    (entry) => {
      hideBanner(feedBanner);
      if (transcript.apply(entry)) repaint();
    },
    {
      onRetry: (attempt, delayMs) =>
        showBanner(feedBanner, `feed disconnected, retrying in ${delayMs / 1000}s`),
    },
  );

  await refreshMemory();
  setInterval(() => void refreshMemory().catch(() => undefined), 3000);

  function wireSearch<T>(
    prefix: string,
    pager: Pager<T>,
    fetchPage: (q: string, page: number) => Promise<import("./types.js").Page<T>>,
    paint: (els: SearchEls) => void,
  ): void {
    const els: SearchEls = {
      results: $(`${prefix}-results`),
      prev: $(`${prefix}-prev`) as HTMLButtonElement,
      next: $(`${prefix}-next`) as HTMLButtonElement,
      status: $(`${prefix}-status`),
    };
    const box = $(`${prefix}-q`) as HTMLInputElement;
    const go = async (page: number) => {
      pager.accept(await fetchPage(pager.query, page));
      paint(els);
    };
    $(`${prefix}-go`).addEventListener("click", () => {
      pager.start(box.value);
      void go(0);
    });
    box.addEventListener("keydown", (e) => {
      if (e.key === "Enter") {
        pager.start(box.value);
        void go(0);
      }
    });
    els.next.addEventListener("click", () => {
      const i = pager.nextIndex();
      if (i !== null) void go(i);
    });
    els.prev.addEventListener("click", () => {
      const i = pager.prevIndex();
      if (i !== null) void go(i);
    });
    paint(els);
  }
}

void boot().catch((err) => {
  const banner = document.getElementById("error-banner");
  if (banner) {
    banner.textContent = `failed to start: ${err instanceof Error ? err.message : err}`;
    banner.hidden = false;
  }
});
