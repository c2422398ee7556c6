"""Processor bindings: scripted double, echo, callable wrapper, HTTP client."""

import json

import pytest

from tiermem.errors import ProcessorUnavailable
from tiermem.processors import (
    CallableProcessor,
    EchoProcessor,
    HttpProcessor,
    ScriptedProcessor,
    processor_from_config,
)


# ---------------------------------------------------------------- scripted

def test_scripted_replays_in_order():
    p = ScriptedProcessor(["one", "two", "three"])
    assert p.complete("anything") == "one"
    assert p.complete("anything") == "two"
    assert p.complete("anything") == "three"


def test_scripted_exhaustion_yields_constant():
    p = ScriptedProcessor(["only"])
    p.complete("x")
    out = p.complete("x")
    assert out == ScriptedProcessor.EXHAUSTED
    parsed = json.loads(out)
    assert parsed["request_heartbeat"] is False
    assert "function" not in parsed


def test_scripted_guarded_entry_waits_for_trigger():
    p = ScriptedProcessor(
        [
            {"output": "reacting", "when": "VALUE = abc"},
            "fallback",
        ]
    )
    # guard not present yet: the unguarded entry fires first
    assert p.complete("nothing relevant here") == "fallback"
    assert p.complete("KEY = k ; VALUE = abc") == "reacting"


def test_scripted_guarded_entry_consumed_once():
    p = ScriptedProcessor([{"output": "once", "when": "trigger"}])
    assert p.complete("the trigger line") == "once"
    assert p.complete("the trigger line") == ScriptedProcessor.EXHAUSTED


def test_scripted_describe_round_trips_through_config():
    p = ScriptedProcessor(["a", {"output": "b", "when": "go"}])
    p.complete("plain")
    desc = p.describe()
    assert desc["type"] == "scripted"
    assert desc["consumed"] == [True, False]
    rebuilt = processor_from_config(desc)
    # resumes where the original left off
    assert rebuilt.complete("go now") == "b"


def test_scripted_consumed_mask_length_checked():
    with pytest.raises(ValueError):
        ScriptedProcessor(["a", "b"], consumed=[True])


# -------------------------------------------------------------------- echo

def test_echo_picks_latest_user_line():
    prompt = (
        "[2026-01-10T12:00:00.000+00:00] user msg-00000001: first\n"
        "[2026-01-10T12:00:01.000+00:00] assistant msg-00000002: reply\n"
        "[2026-01-10T12:00:02.000+00:00] user msg-00000003: second\n"
    )
    parsed = json.loads(EchoProcessor().complete(prompt))
    assert parsed["function"] == "send_message"
    assert parsed["params"]["content"] == "echo: second"
    assert parsed["request_heartbeat"] is False


def test_echo_without_user_lines_echoes_empty():
    parsed = json.loads(EchoProcessor().complete("no transcript at all"))
    assert parsed["params"]["content"] == "echo: "


# ---------------------------------------------------------------- callable

def test_callable_wraps_function_and_labels():
    p = CallableProcessor(lambda prompt: prompt.upper(), label="shouty")
    assert p.complete("abc") == "ABC"
    assert p.describe() == {"type": "callable", "label": "shouty"}


def test_callable_not_rebuildable_from_config():
    with pytest.raises(ValueError, match="callable"):
        processor_from_config({"type": "callable", "label": "x"})


# -------------------------------------------------------------------- http

class _FakeResponse:
    def __init__(self, status_code, body=None):
        self.status_code = status_code
        self._body = body if body is not None else {}

    def raise_for_status(self):
        import httpx

        if self.status_code >= 400:
            raise httpx.HTTPStatusError(
                f"{self.status_code}", request=None, response=None
            )

    def json(self):
        return self._body


def _make_http(monkeypatch, responses):
    """Build an HttpProcessor whose client replays `responses`; returns the
    processor plus the list of payloads it posted."""
    monkeypatch.setenv("TIERMEM_PROCESSOR_URL", "http://processor.test/complete")
    monkeypatch.setattr("time.sleep", lambda s: None)
    proc = HttpProcessor()
    calls = []

    def fake_post(url, json=None):
        calls.append((url, json))
        item = responses[min(len(calls) - 1, len(responses) - 1)]
        if isinstance(item, Exception):
            raise item
        return item

    proc._client.post = fake_post
    return proc, calls


def test_http_requires_url(monkeypatch):
    monkeypatch.delenv("TIERMEM_PROCESSOR_URL", raising=False)
    with pytest.raises(ValueError, match="TIERMEM_PROCESSOR_URL"):
        HttpProcessor()


def test_http_success_returns_completion(monkeypatch):
    proc, calls = _make_http(
        monkeypatch, [_FakeResponse(200, {"completion": "reply text"})]
    )
    assert proc.complete("the prompt") == "reply text"
    assert calls == [("http://processor.test/complete", {"prompt": "the prompt"})]


def test_http_model_env_joins_payload(monkeypatch):
    monkeypatch.setenv("TIERMEM_PROCESSOR_MODEL", "m-small")
    proc, calls = _make_http(monkeypatch, [_FakeResponse(200, {"completion": "ok"})])
    proc.complete("p")
    assert calls[0][1] == {"prompt": "p", "model": "m-small"}


def test_http_retries_then_succeeds(monkeypatch):
    import httpx

    proc, calls = _make_http(
        monkeypatch,
        [
            httpx.ConnectError("refused"),
            _FakeResponse(503),
            _FakeResponse(200, {"completion": "third time"}),
        ],
    )
    assert proc.complete("p") == "third time"
    assert len(calls) == 3


def test_http_5xx_exhausts_to_processor_unavailable(monkeypatch):
    proc, calls = _make_http(monkeypatch, [_FakeResponse(500)])
    with pytest.raises(ProcessorUnavailable, match="500"):
        proc.complete("p")
    assert len(calls) == HttpProcessor.RETRIES + 1


def test_http_missing_completion_key_is_unavailable(monkeypatch):
    proc, _ = _make_http(monkeypatch, [_FakeResponse(200, {"other": 1})])
    with pytest.raises(ProcessorUnavailable):
        proc.complete("p")


# ------------------------------------------------------------------ config

def test_config_default_is_echo():
    assert processor_from_config(None).describe() == {"type": "echo"}
    assert processor_from_config({}).describe() == {"type": "echo"}


def test_config_scripted_entries():
    p = processor_from_config({"type": "scripted", "entries": ["a"]})
    assert p.complete("x") == "a"


def test_config_unknown_type_rejected():
    with pytest.raises(ValueError, match="unknown processor type"):
        processor_from_config({"type": "mystery"})
