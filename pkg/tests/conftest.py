from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from tiermem.messages import new_message

T0 = datetime(2026, 1, 10, 12, 0, 0, tzinfo=timezone.utc)


class MessageFactory:
    """Mints messages with sequential ids and timestamps 1 s apart, so
    tests get deterministic rendering without an agent."""

    def __init__(self, start: datetime = T0) -> None:
        self.clock = start
        self.seq = 0

    def __call__(self, role: str, text: str, ts: datetime | None = None):
        mid = f"msg-{self.seq:08d}"
        self.seq += 1
        if ts is None:
            ts = self.clock
            self.clock = self.clock + timedelta(seconds=1)
        else:
            self.clock = max(self.clock, ts + timedelta(seconds=1))
        return new_message(id=mid, role=role, text=text, timestamp=ts)


@pytest.fixture
def mk() -> MessageFactory:
    return MessageFactory()
