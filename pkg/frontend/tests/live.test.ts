// @vitest-environment jsdom
//
// End-to-end checks against a real agent service process with a scripted
// processor. Skipped nowhere: if the service cannot start, the suite must
// fail loudly rather than silently pass.
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { ApiClient } from "../src/api.js";
import { followFeed } from "../src/sse.js";
import { Transcript } from "../src/transcript.js";
import { Pager } from "../src/memory.js";
import { renderMemoryPanel } from "../src/view.js";
import type { ArchivalItem, StepEntry } from "../src/types.js";

const PORT = 8470 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;
let dataDir: string;
const api = new ApiClient(BASE);

function reply(
  thoughts: string,
  fn?: string,
  params?: Record<string, unknown>,
): string {
  const doc: Record<string, unknown> = { request_heartbeat: false, thoughts };
  if (fn) {
    doc.function = fn;
    doc.params = params ?? {};
  }
  return JSON.stringify(doc);
}

function scriptedConfig(...entries: string[]): Record<string, unknown> {
  return { processor: { type: "scripted", entries } };
}

/** Collect feed entries until `count` arrive or the timeout hits. */
async function collectEntries(agentId: string, count: number): Promise<StepEntry[]> {
  const got: StepEntry[] = [];
  const ctl = new AbortController();
  const timer = setTimeout(() => ctl.abort(), 10000);
  await new Promise<void>((resolve) => {
    void followFeed(api.streamUrl(agentId), (e) => {
      got.push(e);
      if (got.length >= count) {
        clearTimeout(timer);
        ctl.abort();
        resolve();
      }
    }, { signal: ctl.signal, retryDelaysMs: [200] });
    ctl.signal.addEventListener("abort", () => resolve());
  });
  return got;
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), "tiermem-ui-"));
  service = spawn(
    "tiermem",
    ["serve", "--port", String(PORT), "--data-dir", dataDir],
    { stdio: "ignore" },
  );
  for (let i = 0; i < 150; i++) {
    try {
      const resp = await fetch(`${BASE}/agents`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error(`agent service did not come up on :${PORT}`);
});

afterAll(() => {
  service?.kill();
  if (dataDir) rmSync(dataDir, { recursive: true, force: true });
});

describe("live transcript", () => {
  it("one message renders exactly one user and one agent entry", async () => {
    const agent = await api.createAgent(
      "ui-chat",
      scriptedConfig(reply("greeting the user", "send_message", {
        content: "hello from the script",
      })),
    );

    const transcript = new Transcript();
    transcript.addPending("hi agent");
    const resp = await api.sendMessage(agent.agent_id, "hi agent");
    expect(resp.outbound).toEqual(["hello from the script"]);

    const entries = await collectEntries(agent.agent_id, 5);
    for (const e of entries) transcript.apply(e);

    const plain = transcript.visible(false);
    expect(plain.map((r) => r.kind)).toEqual(["user", "agent"]);
    expect(plain[0]?.text).toBe("hi agent");
    expect(plain[0]?.pending).toBe(false); // optimistic echo reconciled
    expect(plain[1]?.text).toBe("hello from the script");

    // replaying the stream adds nothing: entries render exactly once
    for (const e of await collectEntries(agent.agent_id, 5)) transcript.apply(e);
    expect(transcript.visible(false)).toHaveLength(2);
    expect(transcript.visible(true)).toHaveLength(5);
  });
});

describe("live memory panel", () => {
  it("working context shown equals GET /memory after a scripted append", async () => {
    const agent = await api.createAgent(
      "ui-memory",
      scriptedConfig(reply("noting this down", "working_context_append", {
        content: "Birthday: 11th October.",
      })),
    );
    await api.sendMessage(agent.agent_id, "my birthday is the 11th of October");

    const memory = await api.getMemory(agent.agent_id);
    expect(memory.working_context).toContain("Birthday: 11th October.");

    const els = {
      working: document.createElement("pre"),
      gaugeFill: document.createElement("div"),
      gaugeText: document.createElement("div"),
      pressure: document.createElement("div"),
      counts: document.createElement("div"),
    };
    renderMemoryPanel(els, memory);
    expect(els.working.textContent).toBe(memory.working_context);
    const width = parseFloat(els.gaugeFill.style.width);
    expect(width).toBeGreaterThan(0);
    expect(width).toBeLessThanOrEqual(100);
  });
});

describe("live pagination", () => {
  it("next/prev availability follows has_more across real pages", async () => {
    const agent = await api.createAgent("ui-pages", scriptedConfig());
    for (let i = 0; i < 7; i++) {
      await api.insertArchival(
        agent.agent_id,
        `lighthouse logbook entry number ${i}`,
      );
    }

    const pager = new Pager<ArchivalItem>();
    pager.start("lighthouse logbook");
    pager.accept(await api.searchArchival(agent.agent_id, pager.query, 0, 5));
    expect(pager.page?.total_matches).toBe(7);
    expect(pager.page?.items).toHaveLength(5);
    expect(pager.canNext).toBe(true);
    expect(pager.canPrev).toBe(false);

    const next = pager.nextIndex();
    expect(next).toBe(1);
    pager.accept(await api.searchArchival(agent.agent_id, pager.query, next!, 5));
    expect(pager.page?.items).toHaveLength(2);
    expect(pager.canNext).toBe(false); // has_more false: next must disable
    expect(pager.canPrev).toBe(true);
    expect(pager.nextIndex()).toBeNull();
  });

  it("surfaces a 404 as an error with the agent id", async () => {
    await expect(api.getMemory("agent-missing")).rejects.toThrow("agent-missing");
  });
});
