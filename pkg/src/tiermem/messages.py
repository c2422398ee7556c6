"""Message values and their rendered form.

A message is immutable once created. ``token_count`` always equals
``count_tokens(text)``; capacity accounting elsewhere uses the *rendered*
line instead, because the prefix (timestamp, role, id) is what actually
occupies the composed document.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone

from .tokens import Tokenizer, count_tokens

ROLES = ("user", "assistant", "system", "function_call", "function_result")


@dataclass(frozen=True, slots=True)
class Message:
    id: str
    role: str
    text: str
    timestamp: datetime
    token_count: int

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role: {self.role!r}")
        if self.timestamp.tzinfo is None:
            raise ValueError("message timestamps must be timezone-aware")


def new_message(
    id: str,
    role: str,
    text: str,
    timestamp: datetime,
    tokenizer: Tokenizer | None = None,
) -> Message:
    return Message(
        id=id,
        role=role,
        text=text,
        timestamp=timestamp.astimezone(timezone.utc),
        token_count=count_tokens(text, tokenizer),
    )


def iso_ts(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat(timespec="milliseconds")


def render_message(m: Message) -> str:
    """One transcript line: `[timestamp] role id: text`.

    The id keeps rendering injective; two queues that differ at all produce
    different documents even when the visible text coincides.
    """
    return f"[{iso_ts(m.timestamp)}] {m.role} {m.id}: {m.text}"


def rendered_tokens(m: Message, tokenizer: Tokenizer | None = None) -> int:
    # Charge the line plus its joining newline so that summing rendered
    # costs always covers the concatenated document, whatever the queue
    # length. ceil() is subadditive, so caps on parts imply the cap on the
    # whole only when every separator character is attributed to some part.
    return count_tokens(render_message(m) + "\n", tokenizer)
