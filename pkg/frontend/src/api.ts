import type {
  AgentSummary,
  ArchivalItem,
  MemoryOverview,
  MessageResponse,
  Page,
  RecallItem,
} from "./types.js";

export class HttpError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail = (body as { error?: string }).error ?? `HTTP ${resp.status}`;
    throw new HttpError(resp.status, detail);
  }
  return body as T;
}

/** Thin typed client over the agent service. `base` is "" when the page is
 * served from the same origin (the bundled proxy does this). */
export class ApiClient {
  constructor(public base: string = "") {}

  createAgent(name: string, config?: Record<string, unknown>): Promise<AgentSummary> {
    return request(`${this.base}/agents`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config ? { name, config } : { name }),
    });
  }

  async listAgents(): Promise<AgentSummary[]> {
    const body = await request<{ agents: AgentSummary[] }>(`${this.base}/agents`);
    return body.agents;
  }

  sendMessage(agentId: string, text: string): Promise<MessageResponse> {
    return request(`${this.base}/agents/${agentId}/messages`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  getMemory(agentId: string): Promise<MemoryOverview> {
    return request(`${this.base}/agents/${agentId}/memory`);
  }

  searchRecall(
    agentId: string, q: string, page = 0, pageSize?: number,
  ): Promise<Page<RecallItem>> {
    return request(this.searchUrl(agentId, "recall", q, page, pageSize));
  }

  searchArchival(
    agentId: string, q: string, page = 0, pageSize?: number,
  ): Promise<Page<ArchivalItem>> {
    return request(this.searchUrl(agentId, "archival", q, page, pageSize));
  }

  insertArchival(agentId: string, text: string): Promise<{ entry_id: string }> {
    return request(`${this.base}/agents/${agentId}/memory/archival`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
  }

  streamUrl(agentId: string): string {
    return `${this.base}/agents/${agentId}/stream`;
  }

  private searchUrl(
    agentId: string, store: "recall" | "archival",
    q: string, page: number, pageSize?: number,
  ): string {
    const params = new URLSearchParams({ q, page: String(page) });
    if (pageSize !== undefined) params.set("page_size", String(pageSize));
    return `${this.base}/agents/${agentId}/memory/${store}?${params}`;
  }
}
