"""Agent runtime: the event-driven step loop over tiered memory.

Architecture
------------
An agent owns four memory surfaces — pinned instructions, an editable
working context, a capped conversation queue, and the two external stores
(verbatim recall log, searchable archival store) — plus a processor binding.
One *step* handles one external event:

    event -> message -> recall insert -> enqueue (evicting if needed)
          -> [compose -> processor -> parse -> validate -> execute]*

The bracketed loop repeats while the processor asks for a heartbeat, up to
the chain cap; parse and validation failures feed an error message back and
get one more iteration on the same bound. Control yields when the processor
replies without a call, declines the heartbeat, or hits the cap.

Design decisions:
- Every message that enters the queue is written to recall first, so
  eviction can never orphan anything. The function_call message is logged
  before the call executes, which means a recall search *does* see its own
  invocation as the newest match; search policies should skip that hit.
- Ids come from a per-agent counter and timestamps from a logical clock
  seeded by each event's `at` (advancing 1 ms per minted message). Given
  the same starting state, script and events, a step is bit-for-bit
  reproducible — the determinism contract the tests lean on.
- A transport-level processor failure rolls the whole step back to its
  pre-step snapshot and re-raises; the caller sees either a completed step
  or an untouched agent.
- Oversized event payloads are split into queue-safe chunks; an oversized
  function result is replaced by an error note telling the processor to
  narrow its query. Budget safety is structural, not best-effort.
- Steps serialize on a per-agent lock; callers may submit from any thread.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

from .context import MainContext, TokenBudget, compose, default_budget
from .embeddings import Embedder, embedder_from_config
from .errors import CorruptSnapshot, MessageTooLarge, ProcessorUnavailable
from .functions import (
    FunctionSchema,
    ParseError,
    ParsedOutput,
    ValidatedCall,
    ValidationError,
    build_registry,
    default_registry,
    default_schemas,
    execute,
    parse_output,
    render_schema,
    validate,
)
from .messages import Message, iso_ts, new_message, rendered_tokens
from .processors import Processor, processor_from_config
from .queueing import (
    PRESSURE_WARNING_TEXT,
    ConversationQueue,
    truncation_summarizer,
)
from .stores import ArchivalStore, RecallStore
from .tokens import count_tokens
from .working import WorkingContext

logger = logging.getLogger(__name__)

EVENT_KINDS = ("user_message", "system_alert", "user_interaction", "scheduled")

_EVENT_ROLE = {
    "user_message": "user",
    "system_alert": "system",
    "user_interaction": "system",
    "scheduled": "system",
}

CHAIN_LIMIT_NOTE = "chain limit reached"

_WARNING_COST = count_tokens(PRESSURE_WARNING_TEXT) + 12


@dataclass(frozen=True, slots=True)
class Event:
    kind: str
    payload: str
    at: datetime

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {self.kind!r}")
        if self.at.tzinfo is None:
            raise ValueError("event timestamps must be timezone-aware")


@dataclass
class AgentConfig:
    total_tokens: int = 4096
    budget: Optional[TokenBudget] = None  # derived from instructions when None
    max_chain: int = 10
    warn_ratio: float = 0.75
    evict_target_ratio: float = 0.5
    tick_interval_s: Optional[float] = None
    page_size: int = 5
    processor: dict = field(default_factory=lambda: {"type": "echo"})
    embedder: dict = field(default_factory=lambda: {"type": "hashed-bow", "dim": 256})
    functions: Optional[tuple[str, ...]] = None  # None = full default registry


@dataclass(frozen=True, slots=True)
class TraceEntry:
    seq: int
    input_digest: str
    raw_output: str
    thoughts: Optional[str] = None
    parse_error: Optional[str] = None
    call_name: Optional[str] = None
    call_args_json: Optional[str] = None
    validation_error: Optional[str] = None
    result_text: Optional[str] = None
    outbound: tuple[str, ...] = ()
    heartbeat: bool = False


@dataclass(frozen=True, slots=True)
class StepTrace:
    trace_id: str
    event_kind: str
    event_text: str
    entries: tuple[TraceEntry, ...]
    outbound: tuple[str, ...]
    note: Optional[str] = None


_PREAMBLE = """You are the reasoning core of an agent with tiered memory. Your visible
window is small and fixed; the runtime around you maintains durable memory
on your behalf.

Memory tiers:
- WORKING CONTEXT (below): a small editable scratchpad of pinned facts.
  Edit it with working_context_append / working_context_replace.
- CONVERSATION (below): the most recent messages. When it nears its cap you
  will see a warning; after that, older messages are folded into a SUMMARY
  line. Summaries are lossy. Save anything important before it scrolls off.
- Recall storage (outside the window): every message ever exchanged,
  verbatim. Search it with recall_search_text / recall_search_date.
- Archival storage (outside the window): facts you chose to keep. Write
  with archival_insert, search with archival_search.

Reply with exactly one JSON object and nothing else:
  {"thoughts": "...", "function": "...", "params": {...}, "request_heartbeat": false}
- thoughts are private notes; the user never sees them.
- At most one function call per reply; params must match the schema below.
- Set request_heartbeat true to run again right after the function result
  arrives; leave it false to yield until the next external event.
- Search results come in pages; pass "page" to fetch the next one.
- send_message is the only way to reach the user.

"""


def build_instructions(registry: dict[str, FunctionSchema]) -> str:
    return _PREAMBLE + render_schema(registry)


def _registry_from_names(names: Optional[Sequence[str]]) -> dict[str, FunctionSchema]:
    if names is None:
        return default_registry()
    all_schemas = {s.name: s for s in default_schemas()}
    missing = [n for n in names if n not in all_schemas]
    if missing:
        raise ValueError(f"unknown function names: {missing}")
    return build_registry(tuple(all_schemas[n] for n in names))


class Agent:
    """One tiered-memory agent. Public entry points: step(), tick(),
    compose(), save()/load()."""

    def __init__(
        self,
        config: AgentConfig,
        *,
        processor: Optional[Processor] = None,
        embedder: Optional[Embedder] = None,
        name: str = "agent",
        agent_id: Optional[str] = None,
        created_at: Optional[datetime] = None,
        instructions: Optional[str] = None,
    ) -> None:
        self.config = config
        self.id = agent_id or f"agent-{uuid.uuid4().hex[:12]}"
        self.name = name
        self.created_at = created_at or datetime.now(timezone.utc)
        self.registry = _registry_from_names(config.functions)
        self.instructions = instructions or build_instructions(self.registry)
        self.budget = config.budget or default_budget(config.total_tokens, self.instructions)
        self.processor = processor or processor_from_config(config.processor)
        emb = embedder or embedder_from_config(config.embedder)

        self.working = WorkingContext(text="", cap=self.budget.working_cap)
        self.queue = ConversationQueue(
            cap=self.budget.queue_cap,
            mint=self.mint,
            warn_ratio=config.warn_ratio,
            evict_target_ratio=config.evict_target_ratio,
        )
        self.recall = RecallStore()
        self.archival = ArchivalStore(emb)
        self.page_size = config.page_size

        self._msg_seq = 0
        self._clock = self.created_at
        self.step_count = 0
        self.last_event_at: Optional[datetime] = None
        self.paused_until: Optional[datetime] = None
        self._outbound_buffer: list[str] = []

        self.feed: list[dict] = []  # per-process SSE backlog, not persisted
        self._feed_seq = 0
        self._lock = threading.Lock()

    # === small services used by the function layer ===

    def mint(self, role: str, text: str, ts: Optional[datetime] = None) -> Message:
        """Mint a message with the next id; the logical clock advances 1 ms
        unless an explicit timestamp is supplied (summaries keep the stamp of
        what they replaced so the rendered queue stays chronological)."""
        mid = f"msg-{self._msg_seq:08d}"
        self._msg_seq += 1
        if ts is None:
            self._clock = self._clock + timedelta(milliseconds=1)
            ts = self._clock
        return new_message(id=mid, role=role, text=text, timestamp=ts)

    def now(self) -> datetime:
        return self._clock

    def record_outbound(self, content: str) -> None:
        self._outbound_buffer.append(content)

    def pause_for(self, minutes: int) -> None:
        self.paused_until = self._clock + timedelta(minutes=minutes)

    # === composition ===

    def main_context(self) -> MainContext:
        return MainContext(
            system_instructions=self.instructions,
            working_context=self.working.text,
            queue=self.queue.rendered_queue(),
        )

    def compose(self) -> str:
        return compose(self.main_context(), self.budget)

    # === queue admission ===

    def _make_room(self, incoming: int) -> None:
        reserve = incoming + (0 if self.queue.warned else _WARNING_COST)
        if self.queue.occupancy() + reserve > self.queue.cap:
            result = self.queue.evict(truncation_summarizer, flush=True, room_needed=reserve)
            for mid in result.evicted_ids:
                # Recall-before-enqueue makes this unreachable; fail loudly
                # if the invariant ever breaks instead of dropping data.
                if not self.recall.has(mid):
                    raise RuntimeError(f"evicted message {mid} missing from recall")

    def _admit(self, msg: Message) -> Message:
        """Recall-insert, make room, enqueue. The one path into the queue."""
        self.recall.insert(msg)
        self._make_room(rendered_tokens(msg))
        warning = self.queue.enqueue(msg)
        if warning is not None:
            self.recall.insert(warning)
        return msg

    def _admit_result(self, msg: Message) -> Message:
        try:
            return self._admit(msg)
        except MessageTooLarge:
            note = self.mint(
                "function_result",
                "error: ResultTooLarge: the result did not fit the context "
                "window; refine the query or fetch a smaller page",
            )
            return self._admit(note)

    def _split_payload(self, payload: str) -> list[str]:
        safe_chars = max(200, (self.queue.cap // 2) * 5 - 300)
        if len(payload) <= safe_chars:
            return [payload]
        return [payload[i : i + safe_chars] for i in range(0, len(payload), safe_chars)]

    # === the step loop ===

    def step(self, event: Event) -> StepTrace:
        with self._lock:
            return self._step_locked(event)

    def _step_locked(self, event: Event) -> StepTrace:
        if event.kind == "user_message" and not event.payload:
            raise ValueError("user_message events need a non-empty payload")

        snapshot = self._snapshot()
        try:
            return self._run_step(event)
        except ProcessorUnavailable:
            self._restore(snapshot)
            raise

    def _run_step(self, event: Event) -> StepTrace:
        self._clock = max(self._clock, event.at)
        role = _EVENT_ROLE[event.kind]
        for chunk in self._split_payload(event.payload):
            self._admit(self.mint(role, chunk))

        entries: list[TraceEntry] = []
        outbound_all: list[str] = []
        note: Optional[str] = None

        while True:
            seq = len(entries) + 1
            doc = self.compose()
            digest = hashlib.sha256(doc.encode("utf-8")).hexdigest()
            raw = self.processor.complete(doc)

            parsed = parse_output(raw)
            if isinstance(parsed, ParseError):
                entries.append(
                    TraceEntry(seq=seq, input_digest=digest, raw_output=raw,
                               parse_error=parsed.reason)
                )
                self._admit(self.mint(
                    "system",
                    f"output rejected: {parsed.reason}. Reply with a single "
                    "JSON object in the canonical shape.",
                ))
                if seq >= self.config.max_chain:
                    note = CHAIN_LIMIT_NOTE
                    self._admit(self.mint("system", CHAIN_LIMIT_NOTE))
                    break
                continue

            if parsed.thoughts:
                self._admit(self.mint("assistant", parsed.thoughts))

            if parsed.call is None:
                entries.append(
                    TraceEntry(seq=seq, input_digest=digest, raw_output=raw,
                               thoughts=parsed.thoughts)
                )
                break

            call_json = json.dumps(
                {"function": parsed.call.name, "params": parsed.call.params},
                sort_keys=True,
                ensure_ascii=False,
            )
            self._admit(self.mint("function_call", call_json))

            verdict = validate(parsed.call, self.registry)
            if isinstance(verdict, ValidationError):
                entries.append(
                    TraceEntry(seq=seq, input_digest=digest, raw_output=raw,
                               thoughts=parsed.thoughts,
                               call_name=parsed.call.name,
                               call_args_json=call_json,
                               validation_error=f"{verdict.field}: {verdict.reason}")
                )
                self._admit(self.mint(
                    "system",
                    f"invalid call: {verdict.reason} (field: {verdict.field}). "
                    "Check the function schema and try again.",
                ))
                if seq >= self.config.max_chain:
                    note = CHAIN_LIMIT_NOTE
                    self._admit(self.mint("system", CHAIN_LIMIT_NOTE))
                    break
                continue

            result_msg = execute(verdict, self)
            result_msg = self._admit_result(result_msg)
            outbound = list(self._outbound_buffer)
            self._outbound_buffer.clear()
            outbound_all.extend(outbound)

            entries.append(
                TraceEntry(seq=seq, input_digest=digest, raw_output=raw,
                           thoughts=parsed.thoughts,
                           call_name=verdict.name,
                           call_args_json=call_json,
                           result_text=result_msg.text,
                           outbound=tuple(outbound),
                           heartbeat=parsed.request_heartbeat)
            )

            if not parsed.request_heartbeat:
                break
            if seq >= self.config.max_chain:
                note = CHAIN_LIMIT_NOTE
                self._admit(self.mint("system", CHAIN_LIMIT_NOTE))
                break

        self.step_count += 1
        self.last_event_at = event.at
        trace = StepTrace(
            trace_id=f"{self.id}-step-{self.step_count:06d}",
            event_kind=event.kind,
            event_text=event.payload,
            entries=tuple(entries),
            outbound=tuple(outbound_all),
            note=note,
        )
        self._publish(trace)
        return trace

    def tick(self, now: Optional[datetime] = None) -> Optional[StepTrace]:
        """Synthesize a scheduled event when the configured interval has
        elapsed since the last event. At most one step per interval; no-op
        while heartbeats are paused or when no interval is configured."""
        if self.config.tick_interval_s is None:
            return None
        now = now or datetime.now(timezone.utc)
        if self.paused_until is not None and now < self.paused_until:
            return None
        base = self.last_event_at or self.created_at
        if (now - base).total_seconds() < self.config.tick_interval_s:
            return None
        return self.step(Event("scheduled", f"Scheduled wake-up at {iso_ts(now)}.", now))

    # === rollback ===

    def _snapshot(self) -> dict:
        return {
            "working": self.working,
            "queue": self.queue.clone(),
            "recall": self.recall.clone(),
            "archival": self.archival.clone(),
            "msg_seq": self._msg_seq,
            "clock": self._clock,
            "step_count": self.step_count,
            "last_event_at": self.last_event_at,
            "paused_until": self.paused_until,
            "outbound": list(self._outbound_buffer),
        }

    def _restore(self, snap: dict) -> None:
        self.working = snap["working"]
        self.queue.restore(snap["queue"])
        self.recall.restore(snap["recall"])
        self.archival.restore(snap["archival"])
        self._msg_seq = snap["msg_seq"]
        self._clock = snap["clock"]
        self.step_count = snap["step_count"]
        self.last_event_at = snap["last_event_at"]
        self.paused_until = snap["paused_until"]
        self._outbound_buffer = snap["outbound"]

    # === live feed (SSE backlog) ===

    def _publish(self, trace: StepTrace) -> None:
        def emit(kind: str, **payload) -> None:
            self.feed.append(
                {"id": self._feed_seq, "trace_id": trace.trace_id, "type": kind, **payload}
            )
            self._feed_seq += 1

        emit("user_message" if trace.event_kind == "user_message" else "event",
             text=trace.event_text, event_kind=trace.event_kind)
        for e in trace.entries:
            if e.parse_error:
                emit("error", text=e.parse_error, seq=e.seq)
                continue
            if e.thoughts:
                emit("monologue", text=e.thoughts, seq=e.seq)
            if e.call_name:
                emit("function_call", name=e.call_name, params_json=e.call_args_json, seq=e.seq)
            if e.validation_error:
                emit("error", text=e.validation_error, seq=e.seq)
            if e.result_text is not None:
                emit("function_result", text=e.result_text, seq=e.seq)
            for content in e.outbound:
                emit("agent_message", text=content, seq=e.seq)
        if trace.note:
            emit("note", text=trace.note)

    # === persistence ===

    def save(self, directory: Path) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        doc = {
            "format_version": 1,
            "agent_id": self.id,
            "name": self.name,
            "created_at": iso_ts(self.created_at),
            "config": {
                "total_tokens": self.config.total_tokens,
                "budget": {
                    "total": self.budget.total,
                    "system_reserved": self.budget.system_reserved,
                    "working_cap": self.budget.working_cap,
                    "queue_cap": self.budget.queue_cap,
                },
                "max_chain": self.config.max_chain,
                "warn_ratio": self.config.warn_ratio,
                "evict_target_ratio": self.config.evict_target_ratio,
                "tick_interval_s": self.config.tick_interval_s,
                "page_size": self.config.page_size,
                "processor": self.processor.describe(),
                "embedder": self.archival.embedder.describe(),
                "functions": list(self.config.functions) if self.config.functions else None,
            },
            "instructions": self.instructions,
            "working_context": self.working.text,
            "queue": {
                "warned": self.queue.warned,
                "summary": _msg_to_dict(self.queue.summary) if self.queue.summary else None,
                "messages": [_msg_to_dict(m) for m in self.queue.messages],
            },
            "counters": {
                "msg_seq": self._msg_seq,
                "step_count": self.step_count,
                "clock": iso_ts(self._clock),
                "last_event_at": iso_ts(self.last_event_at) if self.last_event_at else None,
                "paused_until": iso_ts(self.paused_until) if self.paused_until else None,
            },
        }
        (directory / "agent.json").write_text(
            json.dumps(doc, indent=2, ensure_ascii=False), encoding="utf-8"
        )
        self.recall.save_jsonl(directory / "recall.jsonl")
        self.archival.save_jsonl(directory / "archival.jsonl")

    @classmethod
    def load(cls, directory: Path, *, processor: Optional[Processor] = None) -> "Agent":
        directory = Path(directory)
        agent_path = directory / "agent.json"
        if not agent_path.exists():
            raise CorruptSnapshot(f"{agent_path} is missing")
        try:
            doc = json.loads(agent_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CorruptSnapshot(f"agent.json is not valid JSON: {exc}") from exc

        def need(container: dict, key: str, where: str):
            if key not in container:
                raise CorruptSnapshot(f"{where} is missing field {key!r}")
            return container[key]

        cfg_raw = need(doc, "config", "agent.json")
        budget_raw = need(cfg_raw, "budget", "agent.json config")
        try:
            budget = TokenBudget(
                total=budget_raw["total"],
                system_reserved=budget_raw["system_reserved"],
                working_cap=budget_raw["working_cap"],
                queue_cap=budget_raw["queue_cap"],
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptSnapshot(f"agent.json budget: {exc}") from exc

        functions = cfg_raw.get("functions")
        config = AgentConfig(
            total_tokens=cfg_raw.get("total_tokens", budget.total),
            budget=budget,
            max_chain=need(cfg_raw, "max_chain", "agent.json config"),
            warn_ratio=need(cfg_raw, "warn_ratio", "agent.json config"),
            evict_target_ratio=need(cfg_raw, "evict_target_ratio", "agent.json config"),
            tick_interval_s=cfg_raw.get("tick_interval_s"),
            page_size=cfg_raw.get("page_size", 5),
            processor=need(cfg_raw, "processor", "agent.json config"),
            embedder=need(cfg_raw, "embedder", "agent.json config"),
            functions=tuple(functions) if functions else None,
        )

        agent = cls(
            config,
            processor=processor or processor_from_config(config.processor),
            embedder=embedder_from_config(config.embedder),
            name=need(doc, "name", "agent.json"),
            agent_id=need(doc, "agent_id", "agent.json"),
            created_at=_parse_ts(need(doc, "created_at", "agent.json"), "created_at"),
            instructions=need(doc, "instructions", "agent.json"),
        )

        agent.working = WorkingContext(
            text=need(doc, "working_context", "agent.json"), cap=budget.working_cap
        )
        q_raw = need(doc, "queue", "agent.json")
        agent.queue.warned = need(q_raw, "warned", "agent.json queue")
        summary_raw = q_raw.get("summary")
        agent.queue.summary = _msg_from_dict(summary_raw) if summary_raw else None
        agent.queue.messages = [_msg_from_dict(m) for m in need(q_raw, "messages", "agent.json queue")]

        counters = need(doc, "counters", "agent.json")
        agent._msg_seq = need(counters, "msg_seq", "agent.json counters")
        agent.step_count = need(counters, "step_count", "agent.json counters")
        agent._clock = _parse_ts(need(counters, "clock", "agent.json counters"), "clock")
        last_ev = counters.get("last_event_at")
        agent.last_event_at = _parse_ts(last_ev, "last_event_at") if last_ev else None
        paused = counters.get("paused_until")
        agent.paused_until = _parse_ts(paused, "paused_until") if paused else None

        recall_path = directory / "recall.jsonl"
        archival_path = directory / "archival.jsonl"
        if not recall_path.exists():
            raise CorruptSnapshot(f"{recall_path} is missing")
        if not archival_path.exists():
            raise CorruptSnapshot(f"{archival_path} is missing")
        agent.recall = RecallStore.load_jsonl(recall_path)
        agent.archival = ArchivalStore.load_jsonl(archival_path, agent.archival.embedder)
        return agent


def _msg_to_dict(m: Message) -> dict:
    return {"id": m.id, "role": m.role, "text": m.text, "timestamp": iso_ts(m.timestamp)}


def _msg_from_dict(d: dict) -> Message:
    try:
        return new_message(
            id=d["id"], role=d["role"], text=d["text"],
            timestamp=datetime.fromisoformat(d["timestamp"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptSnapshot(f"queued message record: {exc}") from exc


def _parse_ts(raw: str, what: str) -> datetime:
    try:
        return datetime.fromisoformat(raw)
    except (TypeError, ValueError) as exc:
        raise CorruptSnapshot(f"bad timestamp in {what}: {raw!r}") from exc
