"""Multi-hop key/value retrieval benchmark.

A dataset is a flat list of `KEY = <uuid> ; VALUE = <uuid>` facts. One key
starts a chain: its value is itself a key, whose value is itself a key, and
so on for `depth` hops until a value that is not a key — the answer. The
agent ingests every fact into archival memory, then must resolve the chain
by iterated search and send the final value.

The truncation baseline pushes the same facts through the conversation
queue instead, so older facts get evicted and summarized down to stubs; a
chain reader that only sees the composed document degrades fast with depth.
"""

from __future__ import annotations

import json
import re
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from random import Random
from typing import Optional

from ..agent import Agent, AgentConfig, Event
from ..errors import CycleDetected
from ..processors import CallableProcessor
from .reading import last_result

N_PAIRS = 140
DEPTHS = (0, 1, 2, 3, 4)

_UUID_RE = r"[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}"


@dataclass(frozen=True, slots=True)
class KvPair:
    key: str
    value: str


@dataclass(frozen=True, slots=True)
class KvDataset:
    pairs: tuple[KvPair, ...]
    chain_keys: tuple[str, ...]  # start key first
    final_value: str
    depth: int
    pair_seed: int
    ordering_seed: int

    @property
    def start_key(self) -> str:
        return self.chain_keys[0]


def _fresh_uuid(rng: Random, seen: set[str]) -> str:
    while True:
        tok = str(uuid.UUID(int=rng.getrandbits(128), version=4))
        if tok not in seen:
            seen.add(tok)
            return tok


def gen_kv(
    depth: int,
    *,
    n_pairs: int = N_PAIRS,
    pair_seed: int = 7,
    ordering_seed: int = 0,
) -> KvDataset:
    """Build a dataset with one depth-long chain and distractor pairs.

    Every uuid in the dataset is globally distinct, so the start key never
    appears as a value and chain hops are unambiguous. `ordering_seed` only
    shuffles presentation order; the facts themselves depend on `pair_seed`
    and `depth` alone.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if n_pairs < depth + 1:
        raise ValueError("n_pairs too small for the requested depth")

    rng = Random(f"kv-pairs:{pair_seed}:{depth}")
    seen: set[str] = set()
    chain_keys = tuple(_fresh_uuid(rng, seen) for _ in range(depth + 1))
    final_value = _fresh_uuid(rng, seen)

    links = list(chain_keys[1:]) + [final_value]
    pairs = [KvPair(k, v) for k, v in zip(chain_keys, links)]
    for _ in range(n_pairs - len(pairs)):
        key = _fresh_uuid(rng, seen)
        pairs.append(KvPair(key, _fresh_uuid(rng, seen)))

    Random(f"kv-order:{ordering_seed}").shuffle(pairs)
    return KvDataset(
        pairs=tuple(pairs),
        chain_keys=chain_keys,
        final_value=final_value,
        depth=depth,
        pair_seed=pair_seed,
        ordering_seed=ordering_seed,
    )


def kv_oracle(dataset: KvDataset) -> str:
    """Resolve the chain directly from the pair table."""
    mapping = {p.key: p.value for p in dataset.pairs}
    token = dataset.start_key
    visited = {token}
    while token in mapping:
        token = mapping[token]
        if token in visited:
            raise CycleDetected(f"kv chain revisits {token}")
        visited.add(token)
    return token


def ingest_lines(dataset: KvDataset) -> list[str]:
    return [f"KEY = {p.key} ; VALUE = {p.value}" for p in dataset.pairs]


@dataclass(frozen=True, slots=True)
class KvResult:
    depth: int
    ordering_seed: int
    answer: str
    expected: str
    correct: bool
    n_processor_calls: int
    n_search_calls: int


def default_kv_config() -> AgentConfig:
    # 2048 total leaves the queue far too small for 140 facts, which is the
    # point: archival search must carry the task, and the queue-only
    # baseline visibly degrades.
    return AgentConfig(total_tokens=2048, processor={"type": "scripted", "entries": []})


def _reply(
    *,
    thoughts: str,
    function: Optional[str] = None,
    params: Optional[dict] = None,
    heartbeat: bool = False,
) -> str:
    out: dict = {"thoughts": thoughts}
    if function is not None:
        out["function"] = function
        out["params"] = params or {}
    out["request_heartbeat"] = heartbeat
    return json.dumps(out)


def _chain_policy(start_key: str):
    """Iterated-search policy: search the current token, hop when the
    result shows it as a key, answer when it does not."""
    state = {"current": None}

    def fn(prompt: str) -> str:
        if state["current"] is None:
            state["current"] = start_key
            return _reply(
                thoughts=f"resolve chain from {start_key}",
                function="archival_search",
                params={"query": start_key},
                heartbeat=True,
            )
        line = last_result(prompt)
        hit = re.search(
            rf"KEY = {re.escape(state['current'])} ; VALUE = ({_UUID_RE})", line
        )
        if hit:
            state["current"] = hit.group(1)
            return _reply(
                thoughts=f"hop to {state['current']}",
                function="archival_search",
                params={"query": state["current"]},
                heartbeat=True,
            )
        # current token is nobody's key: it is the final value
        return _reply(
            thoughts="token is not a key; answering",
            function="send_message",
            params={"content": state["current"]},
        )

    return fn


def run_kv(
    depth: int,
    ordering_seed: int = 0,
    *,
    pair_seed: int = 7,
    config: Optional[AgentConfig] = None,
) -> KvResult:
    """Archival-memory agent on one chain instance."""
    dataset = gen_kv(depth, pair_seed=pair_seed, ordering_seed=ordering_seed)
    cfg = config or default_kv_config()
    t0 = datetime(2026, 1, 5, 9, 0, tzinfo=timezone.utc)
    agent = Agent(
        cfg,
        processor=CallableProcessor(_chain_policy(dataset.start_key), label="kv-chain"),
        name="kv-bench",
        created_at=t0,
    )
    for line in ingest_lines(dataset):
        agent.archival.insert(line, created_at=t0)

    trace = agent.step(
        Event(
            kind="user_message",
            payload=(
                f"Chain task: start from key {dataset.start_key} and follow "
                "KEY = VALUE links until the value is not itself a key. "
                "Send me that final value."
            ),
            at=datetime(2026, 1, 5, 9, 5, tzinfo=timezone.utc),
        )
    )
    answer = trace.outbound[-1] if trace.outbound else ""
    return KvResult(
        depth=depth,
        ordering_seed=ordering_seed,
        answer=answer,
        expected=dataset.final_value,
        correct=answer == dataset.final_value,
        n_processor_calls=len(trace.entries),
        n_search_calls=sum(1 for e in trace.entries if e.call_name == "archival_search"),
    )


_PAIR_LINE = re.compile(rf"KEY = ({_UUID_RE}) ; VALUE = ({_UUID_RE})")


def _baseline_policy(start_key: str, asked: dict):
    """Queue-only policy: follow whatever part of the chain survived
    truncation in the composed document."""

    def fn(prompt: str) -> str:
        if not asked["value"]:
            # bare acknowledgement: admit nothing, keep the queue for facts
            return json.dumps({"request_heartbeat": False})
        visible = {k: v for k, v in _PAIR_LINE.findall(prompt)}
        token = start_key
        hops = set()
        while token in visible and token not in hops:
            hops.add(token)
            token = visible[token]
        return _reply(
            thoughts="answering from visible history",
            function="send_message",
            params={"content": token},
        )

    return fn


def run_kv_truncation_baseline(
    depth: int,
    ordering_seed: int = 0,
    *,
    pair_seed: int = 7,
    config: Optional[AgentConfig] = None,
) -> KvResult:
    """Same facts, no external memory: everything rides the conversation
    queue and old facts are truncated away."""
    dataset = gen_kv(depth, pair_seed=pair_seed, ordering_seed=ordering_seed)
    cfg = config or default_kv_config()
    asked = {"value": False}
    agent = Agent(
        cfg,
        processor=CallableProcessor(
            _baseline_policy(dataset.start_key, asked), label="kv-baseline"
        ),
        name="kv-baseline",
        created_at=datetime(2026, 1, 5, 9, 0, tzinfo=timezone.utc),
    )

    t = datetime(2026, 1, 5, 9, 5, tzinfo=timezone.utc)
    calls = 0
    for i, line in enumerate(ingest_lines(dataset)):
        trace = agent.step(Event(kind="user_message", payload=line, at=t))
        calls += len(trace.entries)
        t = datetime(2026, 1, 5, 9, 5 + (i + 1) // 60, (i + 1) % 60, tzinfo=timezone.utc)

    asked["value"] = True
    trace = agent.step(
        Event(
            kind="user_message",
            payload=(
                f"Chain task: start from key {dataset.start_key} and follow "
                "KEY = VALUE links in our conversation. Send the final value."
            ),
            at=datetime(2026, 1, 5, 9, 30, tzinfo=timezone.utc),
        )
    )
    calls += len(trace.entries)
    answer = trace.outbound[-1] if trace.outbound else ""
    return KvResult(
        depth=depth,
        ordering_seed=ordering_seed,
        answer=answer,
        expected=dataset.final_value,
        correct=answer == dataset.final_value,
        n_processor_calls=calls,
        n_search_calls=0,
    )
