"""HTTP service hosting agents with a streaming step feed.

Routes
------
    POST   /agents                          create, 201 {agent_id, ...}
    GET    /agents                          list descriptors
    POST   /agents/{id}/messages            run one step, {trace_id, outbound}
    GET    /agents/{id}/stream              SSE feed of step entries
    GET    /agents/{id}/memory              memory overview
    POST   /agents/{id}/memory/archival     ingest one entry, 201 {entry_id}
    GET    /agents/{id}/memory/recall       substring search, Page JSON
    GET    /agents/{id}/memory/archival     similarity search, Page JSON
    POST   /agents/{id}/snapshot            persist under the data dir
    DELETE /agents/{id}                     drop from server and disk

The server is stateless above the runtime: every byte of durable state
lives in the agents' snapshot directories, and startup re-loads whatever
the data dir holds. Steps on one agent serialize on the runtime's own
per-agent lock, so concurrent posts queue instead of erroring.

SSE framing is `id: <n>`, `event: step-entry`, `data: <one JSON object>`.
Clients resume after a drop by sending Last-Event-ID (the standard
EventSource reconnect behavior) or an `after` query parameter.
"""

from __future__ import annotations

import asyncio
import json
import logging
import shutil
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .agent import Agent, Event
from .config import parse_agent_config
from .errors import EmptyText, ProcessorUnavailable, TierMemError
from .messages import iso_ts
from .stores import DEFAULT_PAGE_SIZE

logger = logging.getLogger(__name__)

_POLL_S = 0.05


class CreateAgentBody(BaseModel):
    name: str = "agent"
    config: Optional[dict] = None


class MessageBody(BaseModel):
    text: str


class ArchivalBody(BaseModel):
    text: str


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(data_dir: Path | str = "tiermem-data") -> FastAPI:
    data_dir = Path(data_dir)
    app = FastAPI(title="tiermem", docs_url=None, redoc_url=None)
    agents: dict[str, Agent] = {}
    app.state.agents = agents
    app.state.data_dir = data_dir

    if data_dir.is_dir():
        for snap in sorted(data_dir.iterdir()):
            if (snap / "agent.json").is_file():
                agent = Agent.load(snap)
                agents[agent.id] = agent
                logger.info("loaded agent %s from %s", agent.id, snap)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return _error(400, "malformed request body")

    @app.exception_handler(TierMemError)
    async def domain_error(request: Request, exc: TierMemError):
        return _error(400, str(exc))

    def get_agent(agent_id: str) -> Agent:
        agent = agents.get(agent_id)
        if agent is None:
            raise _NotFound(agent_id)
        return agent

    class _NotFound(Exception):
        def __init__(self, agent_id: str) -> None:
            self.agent_id = agent_id

    @app.exception_handler(_NotFound)
    async def not_found(request: Request, exc: _NotFound):
        return _error(404, f"no agent with id {exc.agent_id}")

    @app.post("/agents", status_code=201)
    def create_agent(body: CreateAgentBody):
        try:
            cfg = parse_agent_config(body.config or {})
        except ValueError as exc:
            return _error(400, str(exc))
        agent = Agent(cfg, name=body.name)
        agents[agent.id] = agent
        return {
            "agent_id": agent.id,
            "name": agent.name,
            "created_at": iso_ts(agent.created_at),
        }

    @app.get("/agents")
    def list_agents():
        return {
            "agents": [
                {
                    "agent_id": a.id,
                    "name": a.name,
                    "created_at": iso_ts(a.created_at),
                    "step_count": a.step_count,
                }
                for a in agents.values()
            ]
        }

    @app.post("/agents/{agent_id}/messages")
    def post_message(agent_id: str, body: MessageBody):
        agent = get_agent(agent_id)
        if not body.text.strip():
            return _error(400, "text must be non-empty")
        try:
            trace = agent.step(
                Event(kind="user_message", payload=body.text,
                      at=datetime.now(timezone.utc))
            )
        except ProcessorUnavailable as exc:
            return _error(503, str(exc))
        return {"trace_id": trace.trace_id, "outbound": list(trace.outbound)}

    @app.get("/agents/{agent_id}/stream")
    async def stream(agent_id: str, request: Request, after: int = -1):
        agent = get_agent(agent_id)
        last_id = request.headers.get("last-event-id")
        if last_id is not None:
            try:
                after = int(last_id)
            except ValueError:
                return _error(400, "Last-Event-ID must be an integer")

        async def frames():
            idx = 0
            feed = agent.feed
            # skip already-delivered items on resume
            while idx < len(feed) and feed[idx]["id"] <= after:
                idx += 1
            while True:
                if await request.is_disconnected():
                    return
                while idx < len(feed):
                    item = feed[idx]
                    idx += 1
                    yield (
                        f"id: {item['id']}\n"
                        "event: step-entry\n"
                        f"data: {json.dumps(item, ensure_ascii=False)}\n\n"
                    )
                await asyncio.sleep(_POLL_S)

        return StreamingResponse(frames(), media_type="text/event-stream")

    @app.get("/agents/{agent_id}/memory")
    def memory_overview(agent_id: str):
        agent = get_agent(agent_id)
        return {
            "working_context": agent.working.text,
            "queue_occupancy": {
                "tokens": agent.queue.occupancy(),
                "cap": agent.queue.cap,
            },
            "recall_count": len(agent.recall),
            "archival_count": len(agent.archival),
        }

    @app.post("/agents/{agent_id}/memory/archival", status_code=201)
    def archival_ingest(agent_id: str, body: ArchivalBody):
        agent = get_agent(agent_id)
        try:
            entry_id = agent.archival.insert(body.text)
        except EmptyText as exc:
            return _error(400, str(exc))
        return {"entry_id": entry_id}

    @app.get("/agents/{agent_id}/memory/recall")
    def recall_search(agent_id: str, q: str = "", page: int = 0,
                      page_size: int = DEFAULT_PAGE_SIZE):
        agent = get_agent(agent_id)
        result = agent.recall.search_text(q, page_index=page, page_size=page_size)
        return {
            "items": [
                {
                    "id": m.id,
                    "role": m.role,
                    "text": m.text,
                    "timestamp": iso_ts(m.timestamp),
                }
                for m in result.items
            ],
            "page_index": result.page_index,
            "page_size": result.page_size,
            "total_matches": result.total_matches,
            "has_more": result.has_more,
        }

    @app.get("/agents/{agent_id}/memory/archival")
    def archival_search(agent_id: str, q: str = "", page: int = 0,
                        page_size: int = DEFAULT_PAGE_SIZE):
        agent = get_agent(agent_id)
        result = agent.archival.search(q, page_index=page, page_size=page_size)
        return {
            "items": [
                {
                    "id": s.entry.id,
                    "text": s.entry.text,
                    "created_at": iso_ts(s.entry.created_at),
                    "score": s.score,
                }
                for s in result.items
            ],
            "page_index": result.page_index,
            "page_size": result.page_size,
            "total_matches": result.total_matches,
            "has_more": result.has_more,
        }

    @app.post("/agents/{agent_id}/snapshot")
    def snapshot(agent_id: str):
        agent = get_agent(agent_id)
        target = data_dir / agent.id
        agent.save(target)
        return {"saved": True, "path": str(target)}

    @app.delete("/agents/{agent_id}")
    def delete_agent(agent_id: str):
        get_agent(agent_id)
        del agents[agent_id]
        snap = data_dir / agent_id
        if snap.is_dir():
            shutil.rmtree(snap)
        return {"deleted": agent_id}

    return app
