"""Self-directed function layer.

The processor steers the runtime exclusively through one canonical reply
shape: a single JSON object carrying optional private thoughts, at most one
function call, and a heartbeat request. Parsing and validation failures are
values, not exceptions — they flow back to the processor as system messages
so it can repair its own output. Execution failures likewise never escape;
whatever happens becomes function_result text.

Param types are deliberately small (string / integer / boolean): every
function below stays expressible, and validation stays exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Optional, Union

from .errors import DuplicateName, TierMemError
from .messages import Message, render_message
from .stores import Page, ScoredEntry

PARAM_TYPES = ("string", "integer", "boolean")

# A rendered result item never exceeds this many characters; pages must stay
# far from the queue cap no matter what was stored.
ITEM_CLIP_CHARS = 400


@dataclass(frozen=True, slots=True)
class ParamSpec:
    name: str
    type: str
    required: bool
    description: str

    def __post_init__(self) -> None:
        if self.type not in PARAM_TYPES:
            raise ValueError(f"unsupported param type: {self.type!r}")


@dataclass(frozen=True, slots=True)
class FunctionSchema:
    name: str
    description: str
    params: tuple[ParamSpec, ...]
    returns_page: bool = False


def default_schemas() -> tuple[FunctionSchema, ...]:
    p = ParamSpec
    return (
        FunctionSchema(
            name="send_message",
            description="Deliver a message to the user. The only user-visible output.",
            params=(p("content", "string", True, "message text shown to the user"),),
        ),
        FunctionSchema(
            name="working_context_append",
            description="Append a note to the editable working context.",
            params=(p("content", "string", True, "note to pin"),),
        ),
        FunctionSchema(
            name="working_context_replace",
            description="Replace the first exact occurrence of a working-context phrase.",
            params=(
                p("old_content", "string", True, "exact text to find"),
                p("new_content", "string", True, "replacement text"),
            ),
        ),
        FunctionSchema(
            name="recall_search_text",
            description="Search the full message history for a substring (case-insensitive, most recent first).",
            params=(
                p("query", "string", True, "substring to look for"),
                p("page", "integer", False, "result page, starting at 0"),
            ),
            returns_page=True,
        ),
        FunctionSchema(
            name="recall_search_date",
            description="Fetch history messages inside an inclusive ISO-8601 timestamp range, oldest first.",
            params=(
                p("start", "string", True, "range start, ISO-8601"),
                p("end", "string", True, "range end, ISO-8601"),
                p("page", "integer", False, "result page, starting at 0"),
            ),
            returns_page=True,
        ),
        FunctionSchema(
            name="archival_insert",
            description="Store one text entry in archival storage for later similarity search.",
            params=(p("content", "string", True, "text to store"),),
        ),
        FunctionSchema(
            name="archival_search",
            description="Similarity-search archival storage, best matches first.",
            params=(
                p("query", "string", True, "what to look for"),
                p("page", "integer", False, "result page, starting at 0"),
            ),
            returns_page=True,
        ),
        FunctionSchema(
            name="pause_heartbeats",
            description="Suspend scheduled wake-ups for a number of minutes.",
            params=(p("minutes", "integer", True, "how long to stay quiet"),),
        ),
    )


def build_registry(schemas: tuple[FunctionSchema, ...]) -> dict[str, FunctionSchema]:
    registry: dict[str, FunctionSchema] = {}
    for s in schemas:
        if s.name in registry:
            raise DuplicateName(f"function {s.name!r} registered twice")
        registry[s.name] = s
    return registry


def default_registry() -> dict[str, FunctionSchema]:
    return build_registry(default_schemas())


def render_schema(registry: Mapping[str, FunctionSchema]) -> str:
    """Deterministic schema text, sorted by function name. Byte-stable: the
    processor's instructions embed this, so any drift invalidates cached
    prompts."""
    lines = ["FUNCTIONS"]
    for name in sorted(registry):
        s = registry[name]
        sig = ", ".join(
            f"{p.name}: {p.type}" + ("" if p.required else " (optional)")
            for p in s.params
        )
        ret = " -> result page" if s.returns_page else ""
        lines.append(f"- {name}({sig}){ret}")
        lines.append(f"    {s.description}")
        for p in s.params:
            lines.append(f"    {p.name}: {p.description}")
    return "\n".join(lines)


# === canonical output ===


@dataclass(frozen=True, slots=True, eq=True)
class FunctionCall:
    name: str
    params: dict


@dataclass(frozen=True, slots=True)
class ParsedOutput:
    thoughts: Optional[str]
    call: Optional[FunctionCall]
    request_heartbeat: bool

    def __post_init__(self) -> None:
        if self.call is None and self.request_heartbeat:
            raise ValueError("a heartbeat request needs a function call")


@dataclass(frozen=True, slots=True)
class ParseError:
    reason: str


_ALLOWED_KEYS = {"thoughts", "function", "params", "request_heartbeat"}


def parse_output(text: str) -> Union[ParsedOutput, ParseError]:
    """Parse one canonical reply. Anything other than a single JSON object
    (leading or trailing prose included) is a ParseError value."""
    try:
        obj = json.loads(text.strip())
    except json.JSONDecodeError as exc:
        return ParseError(f"not a single JSON object: {exc.msg} at char {exc.pos}")
    if not isinstance(obj, dict):
        return ParseError(f"expected a JSON object, got {type(obj).__name__}")

    unknown = sorted(set(obj) - _ALLOWED_KEYS)
    if unknown:
        return ParseError(f"unknown key {unknown[0]!r}")

    thoughts = obj.get("thoughts")
    if thoughts is not None and not isinstance(thoughts, str):
        return ParseError("'thoughts' must be a string")

    fn = obj.get("function")
    if fn is not None and not isinstance(fn, str):
        return ParseError("'function' must be a string")

    params = obj.get("params")
    if params is not None and not isinstance(params, dict):
        return ParseError("'params' must be an object")
    if params is not None and fn is None:
        return ParseError("'params' given without 'function'")

    hb = obj.get("request_heartbeat", False)
    if not isinstance(hb, bool):
        return ParseError("'request_heartbeat' must be a boolean")
    if fn is None and hb:
        return ParseError("'request_heartbeat' requires a function call")

    call = FunctionCall(name=fn, params=dict(params or {})) if fn is not None else None
    return ParsedOutput(thoughts=thoughts, call=call, request_heartbeat=hb)


def render_output(out: ParsedOutput) -> str:
    """Canonical serialization; parse_output(render_output(x)) == x."""
    obj: dict = {}
    if out.thoughts is not None:
        obj["thoughts"] = out.thoughts
    if out.call is not None:
        obj["function"] = out.call.name
        obj["params"] = out.call.params
    obj["request_heartbeat"] = out.request_heartbeat
    return json.dumps(obj, ensure_ascii=False)


# === validation ===


@dataclass(frozen=True, slots=True)
class ValidatedCall:
    name: str
    args: dict
    schema: FunctionSchema = field(compare=False)


@dataclass(frozen=True, slots=True)
class ValidationError:
    field: str
    reason: str


_PY_TYPES = {"string": str, "integer": int, "boolean": bool}


def validate(
    call: FunctionCall, registry: Mapping[str, FunctionSchema]
) -> Union[ValidatedCall, ValidationError]:
    schema = registry.get(call.name)
    if schema is None:
        return ValidationError(field="function", reason=f"unknown function {call.name!r}")

    specs = {p.name: p for p in schema.params}
    for pname in call.params:
        if pname not in specs:
            return ValidationError(field=pname, reason=f"unknown param {pname!r}")

    args: dict = {}
    for p in schema.params:
        if p.name not in call.params:
            if p.required:
                return ValidationError(field=p.name, reason=f"missing required param {p.name!r}")
            continue
        value = call.params[p.name]
        # bool is an int subclass; keep the two types strictly apart.
        if p.type == "integer" and isinstance(value, bool):
            return ValidationError(field=p.name, reason=f"param {p.name!r} must be an integer")
        if p.type == "boolean" and not isinstance(value, bool):
            return ValidationError(field=p.name, reason=f"param {p.name!r} must be a boolean")
        if not isinstance(value, _PY_TYPES[p.type]):
            return ValidationError(field=p.name, reason=f"param {p.name!r} must be a {p.type}")
        args[p.name] = value
    return ValidatedCall(name=call.name, args=args, schema=schema)


# === execution ===


def _clip(text: str) -> str:
    flat = text.replace("\n", " ")
    if len(flat) > ITEM_CLIP_CHARS:
        return flat[: ITEM_CLIP_CHARS - 1] + "…"
    return flat


def _render_page_header(page: Page) -> str:
    return (
        f"page={page.page_index} total_matches={page.total_matches} "
        f"has_more={'true' if page.has_more else 'false'}"
    )


def render_message_page(page: Page[Message]) -> str:
    parts = [_render_page_header(page)]
    for i, m in enumerate(page.items, start=1 + page.page_index * page.page_size):
        parts.append(f"{i}. {_clip(render_message(m))}")
    return " || ".join(parts)


def render_scored_page(page: Page[ScoredEntry]) -> str:
    parts = [_render_page_header(page)]
    for i, se in enumerate(page.items, start=1 + page.page_index * page.page_size):
        parts.append(f"{i}. (score={se.score:.4f}) {_clip(se.entry.text)}")
    return " || ".join(parts)


def _parse_when(raw: str, which: str) -> datetime:
    # fromisoformat only learned the Z suffix in 3.11
    normalized = raw[:-1] + "+00:00" if raw.endswith(("Z", "z")) else raw
    try:
        dt = datetime.fromisoformat(normalized)
    except ValueError as exc:
        raise ValueError(f"{which} is not an ISO-8601 timestamp: {raw!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt


def _dispatch(call: ValidatedCall, agent) -> str:
    a = call.args
    name = call.name
    if name == "send_message":
        agent.record_outbound(a["content"])
        return "message sent"
    if name == "working_context_append":
        agent.working = agent.working.append(a["content"])
        return f"appended; working context at {agent.working.tokens()}/{agent.working.cap} tokens"
    if name == "working_context_replace":
        agent.working = agent.working.replace_first(a["old_content"], a["new_content"])
        return f"replaced; working context at {agent.working.tokens()}/{agent.working.cap} tokens"
    if name == "recall_search_text":
        page = agent.recall.search_text(
            a["query"], page_index=a.get("page", 0), page_size=agent.page_size
        )
        return render_message_page(page)
    if name == "recall_search_date":
        page = agent.recall.search_date(
            _parse_when(a["start"], "start"),
            _parse_when(a["end"], "end"),
            page_index=a.get("page", 0),
            page_size=agent.page_size,
        )
        return render_message_page(page)
    if name == "archival_insert":
        entry_id = agent.archival.insert(a["content"], created_at=agent.now())
        return f"stored {entry_id}"
    if name == "archival_search":
        page = agent.archival.search(
            a["query"], page_index=a.get("page", 0), page_size=agent.page_size
        )
        return render_scored_page(page)
    if name == "pause_heartbeats":
        agent.pause_for(a["minutes"])
        return f"heartbeats paused for {a['minutes']} minutes"
    raise ValueError(f"no executor for function {name!r}")


def execute(call: ValidatedCall, agent) -> Message:
    """Run one validated call against the agent's memory surfaces. Never
    raises: every failure is rendered into the function_result text so the
    processor can react to it."""
    try:
        text = _dispatch(call, agent)
    except TierMemError as exc:
        text = f"error: {type(exc).__name__}: {exc}"
    except Exception as exc:  # noqa: BLE001 - results must always materialize
        text = f"error: {type(exc).__name__}: {exc}"
    return agent.mint("function_result", text)
