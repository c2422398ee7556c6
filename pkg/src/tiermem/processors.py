"""Processor bindings: anything that maps a composed document to a reply.

The runtime is processor-agnostic on purpose. Tests and benchmarks use the
scripted double and policy callables so every memory behaviour is checkable
without a real model; deployments point the HTTP binding at a completion
service via environment variables.
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
from typing import Callable, Optional, Protocol, Sequence, Union

from .errors import ProcessorUnavailable

logger = logging.getLogger(__name__)


class Processor(Protocol):
    def complete(self, prompt: str) -> str: ...

    def describe(self) -> dict: ...


class ScriptedProcessor:
    """Replays canned replies in order.

    Each entry is either a plain output string or {"output": ..., "when": ...};
    a guarded entry only fires when its `when` substring occurs in the composed
    input, which is how tests emulate "react to the function result". Entries
    are consumed at most once; when nothing is left (or nothing matches) the
    double yields with a monologue-only reply.
    """

    EXHAUSTED = json.dumps(
        {"thoughts": "script exhausted; yielding", "request_heartbeat": False}
    )

    def __init__(self, entries: Sequence[Union[str, dict]], consumed: Optional[Sequence[bool]] = None) -> None:
        self._entries: list[dict] = []
        for e in entries:
            if isinstance(e, str):
                self._entries.append({"output": e, "when": None})
            else:
                self._entries.append({"output": e["output"], "when": e.get("when")})
        self._consumed = list(consumed) if consumed is not None else [False] * len(self._entries)
        if len(self._consumed) != len(self._entries):
            raise ValueError("consumed mask length does not match entries")

    def complete(self, prompt: str) -> str:
        for i, entry in enumerate(self._entries):
            if self._consumed[i]:
                continue
            when = entry["when"]
            if when is not None and when not in prompt:
                continue
            self._consumed[i] = True
            return entry["output"]
        return self.EXHAUSTED

    def describe(self) -> dict:
        return {
            "type": "scripted",
            "entries": [dict(e) for e in self._entries],
            "consumed": list(self._consumed),
        }


class EchoProcessor:
    """Default interactive double: sends back the latest user line."""

    _USER_LINE = re.compile(r"^\[[^\]]+\] user msg-\d+: (.*)$", re.MULTILINE)

    def complete(self, prompt: str) -> str:
        hits = self._USER_LINE.findall(prompt)
        tail = hits[-1] if hits else ""
        return json.dumps(
            {
                "thoughts": "echoing the latest user message",
                "function": "send_message",
                "params": {"content": f"echo: {tail}"},
                "request_heartbeat": False,
            },
            ensure_ascii=False,
        )

    def describe(self) -> dict:
        return {"type": "echo"}


class CallableProcessor:
    """Wraps a plain function; used by benchmark policies. Not persistable —
    snapshots of agents bound to one must be re-bound at load time."""

    def __init__(self, fn: Callable[[str], str], label: str = "callable") -> None:
        self._fn = fn
        self._label = label

    def complete(self, prompt: str) -> str:
        return self._fn(prompt)

    def describe(self) -> dict:
        return {"type": "callable", "label": self._label}


class HttpProcessor:
    """POSTs the composed prompt to a completion endpoint.

    Endpoint/credentials come from TIERMEM_PROCESSOR_URL /
    TIERMEM_PROCESSOR_TOKEN (and optional TIERMEM_PROCESSOR_MODEL). Two
    retries with exponential backoff; anything still failing surfaces as
    ProcessorUnavailable so the step can roll back.
    """

    RETRIES = 2

    def __init__(self, url: Optional[str] = None, timeout: float = 30.0) -> None:
        import httpx

        self._url = url or os.environ.get("TIERMEM_PROCESSOR_URL", "")
        if not self._url:
            raise ValueError("TIERMEM_PROCESSOR_URL is not set")
        self._model = os.environ.get("TIERMEM_PROCESSOR_MODEL")
        headers = {}
        token = os.environ.get("TIERMEM_PROCESSOR_TOKEN")
        if token:
            headers["Authorization"] = f"Bearer {token}"
        self._client = httpx.Client(timeout=timeout, headers=headers)

    def complete(self, prompt: str) -> str:
        import httpx

        payload: dict = {"prompt": prompt}
        if self._model:
            payload["model"] = self._model
        delay = 0.5
        last_err: Exception | None = None
        for attempt in range(self.RETRIES + 1):
            try:
                resp = self._client.post(self._url, json=payload)
                if resp.status_code >= 500:
                    raise ProcessorUnavailable(f"completion service returned {resp.status_code}")
                resp.raise_for_status()
                return resp.json()["completion"]
            except (httpx.HTTPError, ProcessorUnavailable, KeyError, ValueError) as exc:
                last_err = exc
                if attempt < self.RETRIES:
                    logger.warning("processor call failed (%s), retrying in %.1fs", exc, delay)
                    time.sleep(delay)
                    delay *= 2
        raise ProcessorUnavailable(f"completion service unreachable: {last_err}")

    def describe(self) -> dict:
        return {"type": "http"}


def processor_from_config(cfg: dict | None) -> Processor:
    cfg = cfg or {}
    kind = cfg.get("type", "echo")
    if kind == "echo":
        return EchoProcessor()
    if kind == "scripted":
        return ScriptedProcessor(cfg.get("entries", []), cfg.get("consumed"))
    if kind == "http":
        return HttpProcessor()
    if kind == "callable":
        raise ValueError("callable processors cannot be rebuilt from config; pass one explicitly")
    raise ValueError(f"unknown processor type: {kind!r}")
