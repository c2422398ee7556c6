"""HTTP layer: endpoint matrix over TestClient, SSE over a real server.

The in-process TestClient hangs on streaming responses with the pinned
starlette/httpx pair, so every SSE test boots uvicorn on an ephemeral port
in a daemon thread and talks to it over a socket like any other client.
"""

import json
import threading
import time

import httpx
import pytest
import uvicorn
from fastapi.testclient import TestClient

from tiermem.processors import CallableProcessor
from tiermem.server import create_app


def reply(thoughts=None, function=None, params=None, heartbeat=False) -> str:
    doc: dict = {"request_heartbeat": heartbeat}
    if thoughts is not None:
        doc["thoughts"] = thoughts
    if function is not None:
        doc["function"] = function
        doc["params"] = params or {}
    return json.dumps(doc)


def scripted_config(*entries: str) -> dict:
    return {"processor": {"type": "scripted", "entries": list(entries)}}


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data")
    with TestClient(app) as c:
        c.app = app
        yield c


def make_agent(client, *entries, name="test-agent"):
    body = {"name": name}
    if entries:
        body["config"] = scripted_config(*entries)
    resp = client.post("/agents", json=body)
    assert resp.status_code == 201
    return resp.json()["agent_id"]


# ----------------------------------------------------------------- create

def test_create_and_list(client):
    aid = make_agent(client, name="alpha")
    assert aid.startswith("agent-")
    listing = client.get("/agents").json()["agents"]
    assert [a["name"] for a in listing] == ["alpha"]
    assert listing[0]["agent_id"] == aid
    assert listing[0]["step_count"] == 0


def test_create_rejects_bad_config(client):
    resp = client.post("/agents", json={"config": {"nonsense": {}}})
    assert resp.status_code == 400
    assert "unknown config table" in resp.json()["error"]


def test_malformed_body_is_400(client):
    aid = make_agent(client)
    resp = client.post(f"/agents/{aid}/messages", json={"wrong_key": "hi"})
    assert resp.status_code == 400
    assert resp.json() == {"error": "malformed request body"}


def test_unknown_agent_is_404(client):
    resp = client.get("/agents/agent-nope/memory")
    assert resp.status_code == 404
    assert "agent-nope" in resp.json()["error"]


# --------------------------------------------------------------- messages

def test_message_step_returns_outbound(client):
    aid = make_agent(
        client,
        reply(thoughts="greeting", function="send_message",
              params={"content": "hello from the agent"}),
    )
    resp = client.post(f"/agents/{aid}/messages", json={"text": "hi"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["outbound"] == ["hello from the agent"]
    assert body["trace_id"].startswith(aid)


def test_blank_message_rejected(client):
    aid = make_agent(client)
    resp = client.post(f"/agents/{aid}/messages", json={"text": "   "})
    assert resp.status_code == 400
    assert "non-empty" in resp.json()["error"]


def test_processor_outage_maps_to_503(client):
    from tiermem.errors import ProcessorUnavailable

    aid = make_agent(client)
    agent = client.app.state.agents[aid]
    agent.processor = CallableProcessor(
        lambda prompt: (_ for _ in ()).throw(ProcessorUnavailable("upstream down"))
    )
    resp = client.post(f"/agents/{aid}/messages", json={"text": "hi"})
    assert resp.status_code == 503
    assert "upstream down" in resp.json()["error"]
    # the failed step rolled back: a later message still works
    agent.processor = CallableProcessor(lambda prompt: reply(thoughts="fine"))
    assert client.post(f"/agents/{aid}/messages", json={"text": "again"}).status_code == 200


# ----------------------------------------------------------------- memory

def test_memory_overview_counts(client):
    aid = make_agent(client, reply(thoughts="noted"))
    before = client.get(f"/agents/{aid}/memory").json()
    assert before["recall_count"] == 0
    assert before["working_context"] == ""
    assert before["queue_occupancy"]["tokens"] == 0
    assert before["queue_occupancy"]["cap"] > 0

    client.post(f"/agents/{aid}/messages", json={"text": "remember me"})
    after = client.get(f"/agents/{aid}/memory").json()
    assert after["recall_count"] == 2  # user message + thoughts
    assert after["queue_occupancy"]["tokens"] > 0


def test_archival_ingest_and_search(client):
    aid = make_agent(client)
    r1 = client.post(
        f"/agents/{aid}/memory/archival",
        json={"text": "the mooring fee doubles after sunset"},
    )
    assert r1.status_code == 201 and r1.json()["entry_id"].startswith("arch-")
    client.post(
        f"/agents/{aid}/memory/archival",
        json={"text": "gulls nest on the north breakwater"},
    )
    assert client.get(f"/agents/{aid}/memory").json()["archival_count"] == 2

    page = client.get(
        f"/agents/{aid}/memory/archival", params={"q": "mooring fee"}
    ).json()
    assert page["items"][0]["text"] == "the mooring fee doubles after sunset"
    scores = [it["score"] for it in page["items"]]
    assert scores == sorted(scores, reverse=True)
    assert page["total_matches"] == 2 and page["has_more"] is False


def test_archival_ingest_rejects_empty(client):
    aid = make_agent(client)
    resp = client.post(f"/agents/{aid}/memory/archival", json={"text": "   "})
    assert resp.status_code == 400


def test_recall_search_pagination(client):
    aid = make_agent(client, *[reply(thoughts=f"ack {i}") for i in range(3)])
    for i in range(3):
        client.post(f"/agents/{aid}/messages", json={"text": f"note number {i}"})

    first = client.get(
        f"/agents/{aid}/memory/recall",
        params={"q": "note number", "page": 0, "page_size": 2},
    ).json()
    assert first["total_matches"] == 3
    assert first["has_more"] is True
    assert [it["text"] for it in first["items"]] == ["note number 2", "note number 1"]
    assert all(it["role"] == "user" for it in first["items"])

    second = client.get(
        f"/agents/{aid}/memory/recall",
        params={"q": "note number", "page": 1, "page_size": 2},
    ).json()
    assert [it["text"] for it in second["items"]] == ["note number 0"]
    assert second["has_more"] is False


# -------------------------------------------------------------- lifecycle

def test_snapshot_restart_delete(tmp_path):
    data_dir = tmp_path / "data"
    app1 = create_app(data_dir)
    with TestClient(app1) as c1:
        aid = None
        resp = c1.post(
            "/agents",
            json={"name": "keeper", "config": scripted_config(reply(thoughts="ok"))},
        )
        aid = resp.json()["agent_id"]
        c1.post(f"/agents/{aid}/messages", json={"text": "before restart"})
        c1.post(
            f"/agents/{aid}/memory/archival", json={"text": "persimmon harvest in october"}
        )
        snap = c1.post(f"/agents/{aid}/snapshot")
        assert snap.status_code == 200 and snap.json()["saved"] is True
        memory_before = c1.get(f"/agents/{aid}/memory").json()

    # a fresh app over the same directory rehydrates the agent
    app2 = create_app(data_dir)
    with TestClient(app2) as c2:
        listing = c2.get("/agents").json()["agents"]
        assert [a["agent_id"] for a in listing] == [aid]
        assert c2.get(f"/agents/{aid}/memory").json() == memory_before

        assert c2.delete(f"/agents/{aid}").json() == {"deleted": aid}
        assert c2.get(f"/agents/{aid}/memory").status_code == 404
        assert not (data_dir / aid).exists()

    # deletion also survives a restart
    app3 = create_app(data_dir)
    with TestClient(app3) as c3:
        assert c3.get("/agents").json()["agents"] == []


def test_bad_last_event_id_rejected(client):
    aid = make_agent(client)
    resp = client.get(
        f"/agents/{aid}/stream", headers={"Last-Event-ID": "not-a-number"}
    )
    assert resp.status_code == 400


# --------------------------------------------------------------------- sse

@pytest.fixture
def live_server(tmp_path):
    app = create_app(tmp_path / "data")
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


def _read_frames(client, url, count, headers=None, params=None):
    """Collect `count` SSE frames as (id, event, payload) triples."""
    frames = []
    with client.stream("GET", url, headers=headers or {}, params=params or {}) as resp:
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("text/event-stream")
        fid = event = data = None
        for line in resp.iter_lines():
            if line.startswith("id: "):
                fid = int(line[4:])
            elif line.startswith("event: "):
                event = line[7:]
            elif line.startswith("data: "):
                data = json.loads(line[6:])
            elif line == "":
                frames.append((fid, event, data))
                fid = event = data = None
                if len(frames) >= count:
                    break
    return frames


def test_stream_replays_step_feed(live_server):
    with httpx.Client(base_url=live_server, timeout=10.0) as c:
        resp = c.post(
            "/agents",
            json={"config": scripted_config(
                reply(thoughts="about to answer", function="send_message",
                      params={"content": "the answer"}),
            )},
        )
        aid = resp.json()["agent_id"]
        c.post(f"/agents/{aid}/messages", json={"text": "question"})

        frames = _read_frames(c, f"/agents/{aid}/stream", 5)
    assert [f[0] for f in frames] == [0, 1, 2, 3, 4]
    assert all(f[1] == "step-entry" for f in frames)
    types = [f[2]["type"] for f in frames]
    assert types == [
        "user_message", "monologue", "function_call", "function_result",
        "agent_message",
    ]
    # header id and payload id agree, and every frame names its trace
    for fid, _, data in frames:
        assert data["id"] == fid
        assert data["trace_id"].startswith(aid)
    assert frames[0][2]["text"] == "question"
    assert frames[4][2]["text"] == "the answer"


def test_stream_frames_match_trace_exactly(live_server):
    entries = [
        reply(thoughts="store first", function="archival_insert",
              params={"content": "fact"}, heartbeat=True),
        reply(thoughts="now answer", function="send_message",
              params={"content": "done"}),
    ]
    with httpx.Client(base_url=live_server, timeout=10.0) as c:
        aid = c.post("/agents", json={"config": scripted_config(*entries)}).json()["agent_id"]
        c.post(f"/agents/{aid}/messages", json={"text": "go"})
        frames = _read_frames(c, f"/agents/{aid}/stream", 8)
    types = [f[2]["type"] for f in frames]
    assert types == [
        "user_message",
        "monologue", "function_call", "function_result",
        "monologue", "function_call", "function_result", "agent_message",
    ]
    call_frames = [f[2] for f in frames if f[2]["type"] == "function_call"]
    assert call_frames[0]["name"] == "archival_insert"
    assert call_frames[1]["name"] == "send_message"


def test_stream_resumes_from_last_event_id(live_server):
    with httpx.Client(base_url=live_server, timeout=10.0) as c:
        aid = c.post(
            "/agents", json={"config": scripted_config(reply(thoughts="ok"))}
        ).json()["agent_id"]
        c.post(f"/agents/{aid}/messages", json={"text": "one"})  # feed ids 0, 1

        resumed = _read_frames(
            c, f"/agents/{aid}/stream", 1, headers={"Last-Event-ID": "0"}
        )
        assert [f[0] for f in resumed] == [1]

        via_param = _read_frames(
            c, f"/agents/{aid}/stream", 2, params={"after": -1}
        )
        assert [f[0] for f in via_param] == [0, 1]


def test_stream_delivers_live_steps(live_server):
    entries = [reply(thoughts="first"), reply(thoughts="second")]
    with httpx.Client(base_url=live_server, timeout=10.0) as c:
        aid = c.post("/agents", json={"config": scripted_config(*entries)}).json()["agent_id"]
        c.post(f"/agents/{aid}/messages", json={"text": "warm"})

        def poke():
            time.sleep(0.3)
            with httpx.Client(base_url=live_server, timeout=10.0) as c2:
                c2.post(f"/agents/{aid}/messages", json={"text": "poke"})

        t = threading.Thread(target=poke, daemon=True)
        t.start()
        # 2 frames exist now; the next 2 arrive only after the poke lands
        frames = _read_frames(c, f"/agents/{aid}/stream", 4)
        t.join()
    types = [f[2]["type"] for f in frames]
    assert types == ["user_message", "monologue", "user_message", "monologue"]
    assert frames[2][2]["text"] == "poke"
