"""Editable working context: a flat capped text block the processor curates.

Edits are all-or-nothing; on any error the prior value survives unchanged
(frozen dataclass, operations return new values).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import CapacityExceeded, EmptyFragment, NotFound
from .tokens import count_tokens

_FULL_HINT = (
    "working context is full; move stale notes to archival storage "
    "(archival_insert) or rewrite them (working_context_replace) first"
)


@dataclass(frozen=True, slots=True)
class WorkingContext:
    text: str
    cap: int

    def tokens(self) -> int:
        return count_tokens(self.text)

    def append(self, fragment: str) -> "WorkingContext":
        if not fragment.strip():
            raise EmptyFragment("cannot append an empty fragment")
        joined = f"{self.text}\n{fragment}" if self.text else fragment
        if count_tokens(joined) > self.cap:
            raise CapacityExceeded(_FULL_HINT)
        return replace(self, text=joined)

    def replace_first(self, old: str, new: str) -> "WorkingContext":
        if not old:
            raise EmptyFragment("replace target must be non-empty")
        at = self.text.find(old)
        if at < 0:
            raise NotFound(f"no occurrence of {old!r} in working context")
        edited = self.text[:at] + new + self.text[at + len(old):]
        if count_tokens(edited) > self.cap:
            raise CapacityExceeded(_FULL_HINT)
        return replace(self, text=edited)
