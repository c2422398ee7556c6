"""External context: the recall log and the archival store.

Recall is an append-only verbatim record of every message the runtime ever
processed; nothing in the eviction path touches it, which is what makes queue
trimming safe. Archival is a free-form datastore the processor writes to
explicitly, searched by embedding similarity.

Both searches paginate. A page never exceeds page_size items and carries
enough bookkeeping (page_index, total_matches, has_more) for a caller to walk
the full result set without ever pulling it into the composed context at
once.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Generic, Optional, Sequence, TypeVar

import numpy as np

from .embeddings import Embedder, HashedBagEmbedder
from .errors import CorruptSnapshot, EmptyText, IdCollision, InvalidRange, OutOfOrder
from .messages import Message, iso_ts, new_message

DEFAULT_PAGE_SIZE = 5

T = TypeVar("T")


@dataclass(frozen=True, slots=True)
class Page(Generic[T]):
    items: tuple[T, ...]
    page_index: int
    page_size: int
    total_matches: int

    @property
    def has_more(self) -> bool:
        return (self.page_index + 1) * self.page_size < self.total_matches


def _paginate(matches: Sequence[T], page_index: int, page_size: int) -> Page[T]:
    if page_index < 0:
        raise ValueError("page_index must be non-negative")
    if page_size < 1:
        raise ValueError("page_size must be positive")
    lo = page_index * page_size
    return Page(
        items=tuple(matches[lo : lo + page_size]),
        page_index=page_index,
        page_size=page_size,
        total_matches=len(matches),
    )


class RecallStore:
    """Append-only message log with text and date search."""

    def __init__(self) -> None:
        self._entries: list[Message] = []
        self._folded: list[str] = []
        self._ids: set[str] = set()

    def __len__(self) -> int:
        return len(self._entries)

    def has(self, message_id: str) -> bool:
        return message_id in self._ids

    def insert(self, msg: Message) -> None:
        if msg.id in self._ids:
            raise IdCollision(f"recall already holds message id {msg.id}")
        if self._entries and msg.timestamp < self._entries[-1].timestamp:
            raise OutOfOrder(
                f"message {msg.id} at {iso_ts(msg.timestamp)} is older than the "
                f"newest recall entry {iso_ts(self._entries[-1].timestamp)}"
            )
        self._entries.append(msg)
        self._folded.append(msg.text.lower())
        self._ids.add(msg.id)

    def search_text(
        self, query: str, page_index: int = 0, page_size: int = DEFAULT_PAGE_SIZE
    ) -> Page[Message]:
        """Case-insensitive substring match, most recent first."""
        needle = query.lower()
        hits = [
            self._entries[i]
            for i in range(len(self._entries) - 1, -1, -1)
            if needle in self._folded[i]
        ]
        return _paginate(hits, page_index, page_size)

    def search_date(
        self,
        start: datetime,
        end: datetime,
        page_index: int = 0,
        page_size: int = DEFAULT_PAGE_SIZE,
    ) -> Page[Message]:
        """Inclusive timestamp range, ascending."""
        if start > end:
            raise InvalidRange(f"start {iso_ts(start)} is after end {iso_ts(end)}")
        hits = [m for m in self._entries if start <= m.timestamp <= end]
        return _paginate(hits, page_index, page_size)

    # --- snapshots ---

    def clone(self) -> "RecallStore":
        c = RecallStore()
        c._entries = list(self._entries)
        c._folded = list(self._folded)
        c._ids = set(self._ids)
        return c

    def restore(self, other: "RecallStore") -> None:
        self._entries = list(other._entries)
        self._folded = list(other._folded)
        self._ids = set(other._ids)

    def save_jsonl(self, path: Path) -> None:
        with path.open("w", encoding="utf-8") as f:
            for m in self._entries:
                f.write(
                    json.dumps(
                        {
                            "id": m.id,
                            "role": m.role,
                            "text": m.text,
                            "timestamp": iso_ts(m.timestamp),
                        },
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load_jsonl(cls, path: Path) -> "RecallStore":
        store = cls()
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                msg = new_message(
                    id=rec["id"],
                    role=rec["role"],
                    text=rec["text"],
                    timestamp=datetime.fromisoformat(rec["timestamp"]),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise CorruptSnapshot(f"recall.jsonl line {lineno}: {exc}") from exc
            store.insert(msg)
        return store


@dataclass(frozen=True, slots=True)
class ArchivalEntry:
    id: str
    text: str
    created_at: datetime
    vector: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True, slots=True)
class ScoredEntry:
    entry: ArchivalEntry
    score: float


class ArchivalStore:
    """Write-once text entries, searched by exhaustive cosine scan."""

    def __init__(self, embedder: Optional[Embedder] = None) -> None:
        self.embedder = embedder or HashedBagEmbedder()
        self._entries: list[ArchivalEntry] = []
        self._vectors: list[np.ndarray] = []
        self._seq = 0

    def __len__(self) -> int:
        return len(self._entries)

    def insert(self, text: str, created_at: Optional[datetime] = None) -> str:
        if not text or not text.strip():
            raise EmptyText("archival entries must carry non-empty text")
        entry_id = f"arch-{self._seq:06d}"
        self._seq += 1
        vec = self.embedder.embed(text)
        entry = ArchivalEntry(
            id=entry_id,
            text=text,
            created_at=(created_at or datetime.now(timezone.utc)),
            vector=vec,
        )
        self._entries.append(entry)
        self._vectors.append(vec)
        return entry_id

    def search(
        self, query: str, page_index: int = 0, page_size: int = DEFAULT_PAGE_SIZE
    ) -> Page[ScoredEntry]:
        """Exhaustive scan, descending score, ties resolved by insertion
        order. Scores are clipped into [-1, 1] against float noise."""
        if not self._entries:
            return _paginate([], page_index, page_size)
        q = self.embedder.embed(query)
        mat = np.vstack(self._vectors)
        scores = np.clip(mat @ q, -1.0, 1.0)
        order = np.argsort(-scores, kind="stable")
        ranked = [
            ScoredEntry(entry=self._entries[i], score=float(scores[i])) for i in order
        ]
        return _paginate(ranked, page_index, page_size)

    # --- snapshots ---

    def clone(self) -> "ArchivalStore":
        c = ArchivalStore(self.embedder)
        c._entries = list(self._entries)
        c._vectors = list(self._vectors)
        c._seq = self._seq
        return c

    def restore(self, other: "ArchivalStore") -> None:
        self._entries = list(other._entries)
        self._vectors = list(other._vectors)
        self._seq = other._seq

    def save_jsonl(self, path: Path) -> None:
        with path.open("w", encoding="utf-8") as f:
            for e in self._entries:
                f.write(
                    json.dumps(
                        {"id": e.id, "text": e.text, "created_at": iso_ts(e.created_at)},
                        ensure_ascii=False,
                    )
                    + "\n"
                )

    @classmethod
    def load_jsonl(cls, path: Path, embedder: Optional[Embedder] = None) -> "ArchivalStore":
        """Vectors are recomputed from text; only text survives on disk."""
        store = cls(embedder)
        max_seq = 0
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                entry = ArchivalEntry(
                    id=rec["id"],
                    text=rec["text"],
                    created_at=datetime.fromisoformat(rec["created_at"]),
                    vector=store.embedder.embed(rec["text"]),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise CorruptSnapshot(f"archival.jsonl line {lineno}: {exc}") from exc
            store._entries.append(entry)
            store._vectors.append(entry.vector)
            num = int(entry.id.rsplit("-", 1)[-1]) if "-" in entry.id else 0
            max_seq = max(max_seq, num + 1)
        store._seq = max_seq
        return store
