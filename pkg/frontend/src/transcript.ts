import type { StepEntry } from "./types.js";

// What one transcript row renders as. Debug rows exist in the model the
// moment they arrive; the debug toggle only decides whether they are shown.

export type RowKind =
  | "user"
  | "agent"
  | "monologue"
  | "function_call"
  | "function_result"
  | "error"
  | "note";

export interface Row {
  kind: RowKind;
  text: string;
  /** Feed entry id; absent only while an optimistic send is unconfirmed. */
  entryId?: number;
  pending?: boolean;
  detail?: string;
}

const KIND_BY_TYPE: Record<StepEntry["type"], RowKind> = {
  user_message: "user",
  agent_message: "agent",
  monologue: "monologue",
  function_call: "function_call",
  function_result: "function_result",
  error: "error",
  note: "note",
};

/** Rows a non-debug view shows. */
export const PLAIN_KINDS: ReadonlySet<RowKind> = new Set(["user", "agent"]);

/** Transcript state: rows in feed-arrival order, deduplicated by entry id,
 * with optimistic local echoes reconciled against their feed twin. */
export class Transcript {
  rows: Row[] = [];
  private seen = new Set<number>();

  /** Echo a just-sent message before the server confirms it. */
  addPending(text: string): Row {
    const row: Row = { kind: "user", text, pending: true };
    this.rows.push(row);
    return row;
  }

  /** Drop an optimistic echo whose POST failed (the composer keeps the
   * text, so nothing is lost). */
  dropPending(row: Row): void {
    const i = this.rows.indexOf(row);
    if (i !== -1 && this.rows[i]?.pending) this.rows.splice(i, 1);
  }

  /** Apply one feed entry. Returns true when the model changed. */
  apply(entry: StepEntry): boolean {
    if (typeof entry.id !== "number" || this.seen.has(entry.id)) return false;
    this.seen.add(entry.id);

    if (entry.type === "user_message") {
      const pending = this.rows.find(
        (r) => r.pending && r.kind === "user" && r.text === (entry.text ?? ""),
      );
      if (pending) {
        pending.pending = false;
        pending.entryId = entry.id;
        return true;
      }
    }

    const row: Row = {
      kind: KIND_BY_TYPE[entry.type],
      text: rowText(entry),
      entryId: entry.id,
    };
    if (entry.type === "function_call" && entry.params_json) {
      row.detail = entry.params_json;
    }
    this.rows.push(row);
    return true;
  }

  visible(debug: boolean): Row[] {
    if (debug) return this.rows;
    return this.rows.filter((r) => PLAIN_KINDS.has(r.kind));
  }

  get lastEntryId(): number {
    let last = -1;
    for (const id of this.seen) if (id > last) last = id;
    return last;
  }
}

function rowText(entry: StepEntry): string {
  if (entry.type === "function_call") return entry.name ?? "(call)";
  return entry.text ?? "";
}
