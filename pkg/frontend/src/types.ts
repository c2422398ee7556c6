// Wire types for the tiermem HTTP service. Field names mirror the JSON
// exactly; everything the UI shows is derived from these.

export interface AgentSummary {
  agent_id: string;
  name: string;
  created_at: string;
  step_count?: number;
}

export interface MessageResponse {
  trace_id: string;
  outbound: string[];
}

export interface MemoryOverview {
  working_context: string;
  queue_occupancy: { tokens: number; cap: number };
  recall_count: number;
  archival_count: number;
}

export interface RecallItem {
  id: string;
  role: string;
  text: string;
  timestamp: string;
}

export interface ArchivalItem {
  id: string;
  text: string;
  created_at: string;
  score: number;
}

export interface Page<T> {
  items: T[];
  page_index: number;
  page_size: number;
  total_matches: number;
  has_more: boolean;
}

// One frame of the step feed. `type` decides which optional fields are set.
export interface StepEntry {
  id: number;
  trace_id: string;
  type:
    | "user_message"
    | "monologue"
    | "function_call"
    | "function_result"
    | "agent_message"
    | "error"
    | "note";
  text?: string;
  name?: string;
  params_json?: string;
  event_kind?: string;
  seq?: number;
}

export interface ApiError {
  error: string;
}
