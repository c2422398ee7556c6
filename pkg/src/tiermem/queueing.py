"""Conversation queue: FIFO message history under a hard token cap.

Architecture
------------
The queue is the volatile third of the main context. Messages append at the
tail; when the rendered cost approaches the cap a single pressure warning is
injected so the processor gets a chance to save state; when an append would
not fit, the oldest prefix is folded into a rolling summary line that stands
in for everything evicted so far.

Design decisions:
- Occupancy is measured on *rendered* lines (prefix + text + separator), not
  raw text, because the composed document is what must fit the budget.
- One warning per fill cycle. The flag arms at construction, fires when
  occupancy first reaches warn_ratio * cap, and resets on eviction.
- Eviction removes the minimal prefix that brings occupancy (including a
  reserved allowance for the new summary line) down to
  evict_target_ratio * cap, then hands (prior summary, evicted messages) to
  the summarizer. Recursive by construction: the second eviction summarizes
  the first summary together with newly evicted messages.
- A summarizer that overruns its cap is retried once at half cap, then
  replaced by the truncation summarizer; as a last resort the digest is
  tail-clipped. Eviction never fails.
- The queue does not mint ids or timestamps itself; the owner supplies a
  mint callback so ids stay globally ordered and deterministic.

Whole messages are the eviction unit. Callers must split anything larger
than the cap before enqueueing (MessageTooLarge).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Optional, Protocol, Sequence

from .errors import MessageTooLarge
from .messages import Message, iso_ts, rendered_tokens
from .tokens import count_tokens

# Verbatim pressure-warning line shown to the processor.
PRESSURE_WARNING_TEXT = (
    "Warning: the conversation history will soon reach its maximum length and "
    "be trimmed. Make sure to save any important information from the "
    "conversation to your memory before it is removed."
)

# Rendered-line prefix worst case, in tokens ("[ts] role id: " plus newline).
_PREFIX_ALLOWANCE_TOKENS = 12

# A digest snippet keeps at most this many characters of a first sentence.
# Deliberately tight: the summary is a lossy placeholder, and facts buried
# past the cut must be recovered from recall storage, not from here.
SNIPPET_CHARS = 48

_SENTENCE_END = re.compile(r"[.!?]")

# mint(role, text, ts=None) -> Message; owner controls ids and clocks.
MintFn = Callable[..., Message]


class Summarizer(Protocol):
    def __call__(
        self, prior: Optional[str], evicted: Sequence[Message], cap_tokens: int
    ) -> str: ...


def _first_sentence(text: str) -> str:
    stripped = text.strip()
    m = _SENTENCE_END.search(stripped)
    if m:
        stripped = stripped[: m.end()]
    return stripped[:SNIPPET_CHARS]


def truncation_summarizer(
    prior: Optional[str], evicted: Sequence[Message], cap_tokens: int
) -> str:
    """Digest: header plus the clipped first sentence of each evicted message.

    The prior summary text rides along at the head of the body, and when the
    body must shrink to fit the cap it loses its *head* first. Older content
    therefore ages out of the digest as new evictions stack up; the verbatim
    record lives in recall storage, not here.
    """
    if not evicted:
        return prior or ""
    header = (
        f"SUMMARY(n={len(evicted)}; "
        f"span={iso_ts(evicted[0].timestamp)}..{iso_ts(evicted[-1].timestamp)}): "
    )
    snippets = [s for s in (_first_sentence(m.text) for m in evicted) if s]
    body = " | ".join(([prior] if prior else []) + snippets)
    room = cap_tokens * 5 - len(header)
    if room <= 0:
        return header[: max(cap_tokens * 5, 0)]
    if len(body) > room:
        body = body[-room:]
    return header + body


@dataclass(frozen=True, slots=True)
class EvictResult:
    evicted_ids: tuple[str, ...]
    summary: Optional[Message]
    did_evict: bool


class ConversationQueue:
    """Single-writer FIFO with summary slot and pressure flag."""

    def __init__(
        self,
        cap: int,
        mint: MintFn,
        warn_ratio: float = 0.75,
        evict_target_ratio: float = 0.5,
    ) -> None:
        if not 0.0 < warn_ratio < 1.0:
            raise ValueError("warn_ratio must lie in (0, 1)")
        if not 0.0 < evict_target_ratio < warn_ratio:
            raise ValueError("evict_target_ratio must lie in (0, warn_ratio)")
        self.cap = cap
        self.warn_ratio = warn_ratio
        self.evict_target_ratio = evict_target_ratio
        self._mint = mint
        self.messages: list[Message] = []
        self.summary: Optional[Message] = None
        self.warned = False

    # --- accounting ---

    def occupancy(self) -> int:
        occ = sum(rendered_tokens(m) for m in self.messages)
        if self.summary is not None:
            occ += rendered_tokens(self.summary)
        return occ

    def rendered_queue(self) -> tuple[Message, ...]:
        """Queue as composed: summary line first when present."""
        head = (self.summary,) if self.summary is not None else ()
        return head + tuple(self.messages)

    # --- operations ---

    def enqueue(self, msg: Message) -> Optional[Message]:
        """Append one message. Returns the pressure warning if this append
        armed it, else None. The caller is responsible for making room
        beforehand (see Agent._admit); a message that can never fit is
        rejected outright."""
        cost = rendered_tokens(msg)
        if cost > self.cap:
            raise MessageTooLarge(
                f"message {msg.id} needs {cost} tokens, queue cap is {self.cap}; "
                "split it before enqueueing"
            )
        self.messages.append(msg)
        if not self.warned and self.occupancy() >= self.warn_ratio * self.cap:
            estimate = count_tokens(PRESSURE_WARNING_TEXT) + _PREFIX_ALLOWANCE_TOKENS
            if self.occupancy() + estimate <= self.cap:
                warning = self._mint("system", PRESSURE_WARNING_TEXT)
                self.messages.append(warning)
                self.warned = True
                return warning
        return None

    def evict(
        self,
        summarizer: Summarizer,
        *,
        flush: bool = False,
        room_needed: int = 0,
    ) -> EvictResult:
        """Fold the oldest prefix into the rolling summary.

        No-op unless occupancy has reached the cap or the caller explicitly
        flushes (the runtime flushes pre-emptively when an append would
        overflow, passing the space it needs via room_needed). Returns the
        evicted ids so the owner can assert recall coverage.
        """
        if not flush and self.occupancy() < self.cap:
            return EvictResult((), self.summary, False)

        target = int(self.evict_target_ratio * self.cap)
        allowed_after = max(0, min(target, self.cap - room_needed))
        allowance = min(
            allowed_after, max(allowed_after // 5, _PREFIX_ALLOWANCE_TOKENS + 1)
        )
        keep_budget = allowed_after - allowance

        evicted: list[Message] = []
        remaining = sum(rendered_tokens(m) for m in self.messages)
        while self.messages and remaining > keep_budget:
            m = self.messages.pop(0)
            evicted.append(m)
            remaining -= rendered_tokens(m)

        if not evicted and (
            self.summary is None or rendered_tokens(self.summary) <= allowance
        ):
            # Flush with nothing to fold and a summary that already fits.
            return EvictResult((), self.summary, False)

        prior = self.summary.text if self.summary is not None else None
        text_cap = max(0, allowance - _PREFIX_ALLOWANCE_TOKENS)
        if text_cap == 0:
            # Nothing can be kept; drop the summary entirely (pure truncation).
            self.summary = None
        else:
            text = summarizer(prior, evicted, text_cap)
            if count_tokens(text) > text_cap:
                text = summarizer(prior, evicted, max(1, text_cap // 2))
            if count_tokens(text) > text_cap:
                text = truncation_summarizer(prior, evicted, text_cap)
            if count_tokens(text) > text_cap:
                text = text[-(text_cap * 5):]
            if text:
                ts = evicted[-1].timestamp if evicted else (
                    self.summary.timestamp if self.summary is not None else None
                )
                self.summary = self._mint("system", text, ts)
            else:
                self.summary = None

        if evicted:
            self.warned = False
        return EvictResult(
            tuple(m.id for m in evicted), self.summary, bool(evicted)
        )

    # --- snapshots ---

    def clone(self) -> "ConversationQueue":
        q = ConversationQueue(self.cap, self._mint, self.warn_ratio, self.evict_target_ratio)
        q.messages = list(self.messages)
        q.summary = self.summary
        q.warned = self.warned
        return q

    def restore(self, other: "ConversationQueue") -> None:
        self.messages = list(other.messages)
        self.summary = other.summary
        self.warned = other.warned
