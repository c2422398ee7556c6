"""Deferred-recall benchmark over multi-session chat history.

Five synthetic chat sessions are replayed through an agent. One user turn,
buried in an early session, states a preference in passing. After the last
session the user asks for it back. Answering requires searching recall
storage: the preference sentence is engineered so the value sits past the
summary snippet window, so no truncation digest can carry it forward.

Scoring is recall-oriented ROUGE-L of the agent's answer against the
expected answer sentence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from random import Random
from typing import Optional

from ..agent import Agent, AgentConfig, Event
from ..processors import CallableProcessor
from .metrics import rouge_l
from .reading import last_result, recall_items

N_SESSIONS = 5

# Preference topics; the search keyword is the topic's last word, so every
# last word here must be absent from the smalltalk pools below.
_TOPICS = (
    ("color", "deep teal with a gray undertone"),
    ("dessert", "rhubarb crumble with toasted oats"),
    ("constellation", "the southern cross"),
    ("houseplant", "a variegated monstera"),
    ("typeface", "a narrow grotesque with tall ascenders"),
)

_SMALLTALK_USER = (
    "The train was packed again this morning.",
    "I finally fixed the squeaky hinge on the balcony door.",
    "Lunch was a very average sandwich from the corner place.",
    "My neighbor is learning the trumpet, badly.",
    "I moved my desk closer to the window.",
    "The elevator is out again, third time this month.",
    "I found my old film camera while cleaning.",
    "The forecast says rain for the whole weekend.",
    "I signed up for a pottery class on Thursdays.",
    "My laptop fan has started making a whirring noise.",
    "The bakery downstairs changed owners.",
    "I re-potted the ferns on the windowsill.",
    "Traffic on the bridge was backed up for an hour.",
    "I archived about four hundred old emails today.",
    "The printer jammed twice before the meeting.",
    "I tried a new route through the park on my walk.",
)

_SMALLTALK_ASSISTANT = (
    "That sounds like a rough start to the day.",
    "Nice, small repairs are oddly satisfying.",
    "Maybe worth trying the soup place next time.",
    "Earplugs might save your evenings.",
    "Natural light makes a big difference.",
    "Hopefully the building manager sorts it out soon.",
    "Old cameras are great, does it still work?",
    "A good excuse to stay in and read.",
    "Pottery is supposed to be very calming.",
    "Could be dust, compressed air might help.",
    "New owners sometimes means new recipes.",
    "Ferns do appreciate the attention.",
    "An hour is brutal, any alternate route?",
    "Inbox zero is a real achievement.",
    "Printers always pick the worst moment.",
    "Park routes beat main roads any day.",
)

_GOLD_TEMPLATE = (
    "By the way, I do not think I ever mentioned it, but my favorite "
    "{topic} is {value}."
)
_GOLD_ACK = "Noted, I will keep that in mind."
_QUESTION_TEMPLATE = "Remind me, what is my favorite {topic}?"


@dataclass(frozen=True, slots=True)
class SessionLine:
    role: str  # "user" or "assistant"
    text: str


@dataclass(frozen=True, slots=True)
class DmrCase:
    sessions: tuple[tuple[SessionLine, ...], ...]
    topic: str
    value: str
    question: str
    gold_answer: str
    gold_session: int  # 0-based; never the last session
    keyword: str
    seed: int


def gen_dmr(seed: int = 0) -> DmrCase:
    rng = Random(f"dmr:{seed}")
    topic, value = _TOPICS[rng.randrange(len(_TOPICS))]
    gold_line = _GOLD_TEMPLATE.format(topic=topic, value=value)
    # value must start past the digest snippet window or a summary could
    # carry it; the fixed preamble guarantees that, assert anyway
    assert gold_line.index(value) >= 48

    gold_session = rng.randrange(N_SESSIONS - 1)
    sessions: list[tuple[SessionLine, ...]] = []
    for s in range(N_SESSIONS):
        n_turns = rng.randint(5, 7)  # 10..14 alternating lines
        lines: list[SessionLine] = []
        for _ in range(n_turns):
            lines.append(SessionLine("user", rng.choice(_SMALLTALK_USER)))
            lines.append(SessionLine("assistant", rng.choice(_SMALLTALK_ASSISTANT)))
        if s == gold_session:
            slot = rng.randrange(n_turns)
            lines[2 * slot] = SessionLine("user", gold_line)
            lines[2 * slot + 1] = SessionLine("assistant", _GOLD_ACK)
        sessions.append(tuple(lines))

    return DmrCase(
        sessions=tuple(sessions),
        topic=topic,
        value=value,
        question=_QUESTION_TEMPLATE.format(topic=topic),
        gold_answer=f"my favorite {topic} is {value}.",
        gold_session=gold_session,
        keyword=topic.split()[-1],
        seed=seed,
    )


@dataclass(frozen=True, slots=True)
class DmrResult:
    seed: int
    answer: str
    gold_answer: str
    rouge_recall: float
    retrieved_gold: bool
    n_processor_calls: int
    n_search_calls: int


def _replay_policy(assistant_lines: list[str], keyword: str, asking: dict):
    """Replay scripted assistant turns, then answer the final question by
    searching recall for the preference keyword."""
    state = {"i": 0, "searched": False}
    answer_re = re.compile(r"my favorite (.+)$")

    def fn(prompt: str) -> str:
        if not asking["value"]:
            i = state["i"]
            state["i"] += 1
            return json.dumps(
                {"thoughts": assistant_lines[i], "request_heartbeat": False}
            )
        if not state["searched"]:
            state["searched"] = True
            return json.dumps(
                {
                    "thoughts": "that predates my window, searching history",
                    "function": "recall_search_text",
                    "params": {"query": keyword},
                    "request_heartbeat": True,
                }
            )
        for role, text in recall_items(last_result(prompt)):
            if role != "user" or "Remind me" in text:
                continue  # skip the question itself and non-user hits
            hit = answer_re.search(text)
            if hit:
                return json.dumps(
                    {
                        "thoughts": "found the original mention",
                        "function": "send_message",
                        "params": {"content": "my favorite " + hit.group(1)},
                        "request_heartbeat": False,
                    }
                )
        return json.dumps(
            {
                "thoughts": "nothing retrievable",
                "function": "send_message",
                "params": {"content": "I could not find that preference."},
                "request_heartbeat": False,
            }
        )

    return fn


def default_dmr_config() -> AgentConfig:
    # small enough that early sessions age out of the queue before the
    # question arrives
    return AgentConfig(total_tokens=2048, processor={"type": "scripted", "entries": []})


def run_dmr(seed: int = 0, *, config: Optional[AgentConfig] = None) -> DmrResult:
    case = gen_dmr(seed)
    cfg = config or default_dmr_config()
    asking = {"value": False}
    assistant_lines = [
        line.text for session in case.sessions for line in session if line.role == "assistant"
    ]
    t0 = datetime(2026, 2, 2, 8, 0, tzinfo=timezone.utc)
    agent = Agent(
        cfg,
        processor=CallableProcessor(
            _replay_policy(assistant_lines, case.keyword, asking), label="dmr-replay"
        ),
        name="dmr-bench",
        created_at=t0,
    )

    calls = 0
    t = t0
    for session in case.sessions:
        t += timedelta(hours=1)
        for line in session:
            if line.role != "user":
                continue  # assistant turns come back as scripted thoughts
            trace = agent.step(Event(kind="user_message", payload=line.text, at=t))
            calls += len(trace.entries)
            t += timedelta(seconds=10)

    asking["value"] = True
    trace = agent.step(Event(kind="user_message", payload=case.question, at=t + timedelta(hours=1)))
    calls += len(trace.entries)

    answer = trace.outbound[-1] if trace.outbound else ""
    retrieved = any(
        e.call_name == "recall_search_text"
        and e.result_text is not None
        and case.value in e.result_text
        for e in trace.entries
    )
    return DmrResult(
        seed=seed,
        answer=answer,
        gold_answer=case.gold_answer,
        rouge_recall=rouge_l(answer, case.gold_answer).recall,
        retrieved_gold=retrieved,
        n_processor_calls=calls,
        n_search_calls=sum(1 for e in trace.entries if e.call_name == "recall_search_text"),
    )
