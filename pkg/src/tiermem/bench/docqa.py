"""Document question answering over an embedding-searched corpus.

The fixture is adversarial on purpose: for the first question, six short
decoy passages echo the question's wording and outrank the actual answer
passage, pushing it just past the top-k cut. A fixed-budget baseline that
pastes the top k passages into the prompt misses it; an agent that pages
through results keeps going and finds it.

The reader is deliberately mechanical so retrieval is the only variable: a
passage counts as the answer source iff it contains the question's final
keyword, and an answer is correct iff the gold string appears in what the
reader produced.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Optional

from ..agent import Agent, AgentConfig, Event
from ..embeddings import HashedBagEmbedder
from ..processors import CallableProcessor
from ..stores import ArchivalStore
from .reading import has_more, last_result, scored_items


@dataclass(frozen=True, slots=True)
class DocqaQuestion:
    question: str
    answer: str


def question_keyword(question: str) -> str:
    """Final word of the question, lowercased, punctuation stripped."""
    return question.lower().rstrip("?!. ").split()[-1]


_GOLD_1 = (
    "The lighthouse trust at windmere was founded by Ansel Creel, a retired "
    "harbor pilot, during the winter after the north pier fire of 1911."
)

# Decoys: short, dense echoes of the first question's words. None mention
# windmere or the founder, so they satisfy the retriever and starve the
# reader.
_DECOYS_1 = (
    "Nobody recalls who founded the lighthouse trust.",
    "Records disagree on who founded the lighthouse trust.",
    "Who founded the lighthouse trust remains disputed.",
    "Ask any keeper who founded the lighthouse trust.",
    "Historians debate who founded the lighthouse trust.",
    "The question of who founded the lighthouse trust lingers.",
)

_GOLD_2 = (
    "The beacon at skerry narrows burns whale oil carried up the cliff "
    "stairs in copper cans every third evening."
)

_FILLERS = (
    "Harbor seals gather near the breakwater before dawn.",
    "Fishing crews mend their nets along the south quay.",
    "Fog rolls in over the shipping lanes most autumn mornings.",
    "A rusted trawler has been anchored off the shoals for years.",
    "Gulls follow the ferries from pier to pier all afternoon.",
    "Tide tables are posted weekly outside the harbormaster office.",
    "Merchant routes once crossed here on the way to the northern ports.",
    "Storm shutters stay bolted through the winter gales.",
    "The old customs house now stores rope and spare buoys.",
    "Lanterns were rationed during the coal shortage.",
    "Chart corrections arrive by mail on the first monday.",
    "A bell buoy marks the wreck on the outer bar.",
    "Salvage rights were argued over in the county court.",
    "Dockworkers unload salt cod in the early morning.",
    "The pilot boat crew drills every other thursday.",
    "Driftwood piles up along the shingle after every blow.",
    "Navigation classes run in the boathouse during winter.",
    "The breakwater lost twelve meters in the great storm.",
    "Rope lockers are inspected before each crossing.",
    "Coastal freighters anchor in the roads awaiting berth space.",
    "The chandlery keeps paraffin behind the counter.",
    "Moorings are reassigned by lottery each spring.",
    "An abandoned cannery rusts at the river mouth.",
    "Semaphore flags hang framed in the sailors hall.",
    "The dredger works the channel every few seasons.",
    "Ice once closed the inner harbor for six weeks.",
    "Lifeboat drills draw a small crowd on sundays.",
    "The ferry timetable changes with the equinox.",
    "Barnacles get scraped from the hulls at low tide.",
    "A weather glass hangs by the harbor office door.",
)


def synthetic_docqa_fixture() -> tuple[tuple[str, ...], tuple[DocqaQuestion, ...]]:
    """Corpus and questions with known retrieval geometry.

    Question 1's gold passage ranks just below the decoys; question 2's
    ranks first. Tests pin the exact ranks with an independent cosine scan.
    """
    corpus = (_GOLD_1,) + _DECOYS_1 + (_GOLD_2,) + _FILLERS
    questions = (
        DocqaQuestion(
            question="Who founded the lighthouse trust at windmere?",
            answer="Ansel Creel",
        ),
        DocqaQuestion(
            question="What fuel does the beacon burn at skerry narrows?",
            answer="whale oil",
        ),
    )
    return corpus, questions


@dataclass(frozen=True, slots=True)
class QuestionOutcome:
    question: str
    answer: str
    produced: str
    correct: bool
    n_searches: int


@dataclass(frozen=True, slots=True)
class DocqaResult:
    mode: str
    k: int
    accuracy: float
    outcomes: tuple[QuestionOutcome, ...]


def _read(passages: list[str], keyword: str) -> str:
    for p in passages:
        if keyword in p.lower():
            return p
    return ""


def run_docqa(
    corpus: tuple[str, ...],
    questions: tuple[DocqaQuestion, ...],
    *,
    k: int = 5,
    mode: str = "paged",
    config: Optional[AgentConfig] = None,
) -> DocqaResult:
    if mode == "baseline":
        return _run_baseline(corpus, questions, k)
    if mode == "paged":
        return _run_paged(corpus, questions, k, config)
    raise ValueError(f"unknown docqa mode: {mode!r}")


def _run_baseline(
    corpus: tuple[str, ...], questions: tuple[DocqaQuestion, ...], k: int
) -> DocqaResult:
    """Fixed window: top-k passages pasted next to the question, one shot."""
    store = ArchivalStore(HashedBagEmbedder())
    for text in corpus:
        store.insert(text)
    outcomes = []
    for q in questions:
        page = store.search(q.question, page_index=0, page_size=k)
        visible = [scored.entry.text for scored in page.items]
        produced = _read(visible, question_keyword(q.question))
        outcomes.append(
            QuestionOutcome(
                question=q.question,
                answer=q.answer,
                produced=produced,
                correct=q.answer in produced,
                n_searches=1,
            )
        )
    return _result("baseline", k, outcomes)


def _paging_policy(question: str, keyword: str):
    state = {"page": -1}

    def fn(prompt: str) -> str:
        if state["page"] >= 0:
            line = last_result(prompt)
            hit = _read(scored_items(line), keyword)
            if hit:
                return json.dumps(
                    {
                        "thoughts": "answer passage located",
                        "function": "send_message",
                        "params": {"content": hit},
                        "request_heartbeat": False,
                    }
                )
            if not has_more(line):
                return json.dumps(
                    {
                        "thoughts": "exhausted the ranking",
                        "function": "send_message",
                        "params": {"content": "no passage found"},
                        "request_heartbeat": False,
                    }
                )
        state["page"] += 1
        return json.dumps(
            {
                "thoughts": f"requesting result page {state['page']}",
                "function": "archival_search",
                "params": {"query": question, "page": state["page"]},
                "request_heartbeat": True,
            }
        )

    return fn


def _run_paged(
    corpus: tuple[str, ...],
    questions: tuple[DocqaQuestion, ...],
    k: int,
    config: Optional[AgentConfig],
) -> DocqaResult:
    """Agent mode: same retriever, but the policy walks past the first page
    when the keyword is missing."""
    base = config or AgentConfig(
        total_tokens=4096, processor={"type": "scripted", "entries": []}
    )
    outcomes = []
    for q in questions:
        cfg = replace(base, page_size=k)
        keyword = question_keyword(q.question)
        agent = Agent(
            cfg,
            processor=CallableProcessor(_paging_policy(q.question, keyword), label="docqa"),
            name="docqa-bench",
            created_at=datetime(2026, 3, 3, 10, 0, tzinfo=timezone.utc),
        )
        for text in corpus:
            agent.archival.insert(text)
        trace = agent.step(
            Event(
                kind="user_message",
                payload=q.question,
                at=datetime(2026, 3, 3, 10, 5, tzinfo=timezone.utc),
            )
        )
        produced = trace.outbound[-1] if trace.outbound else ""
        outcomes.append(
            QuestionOutcome(
                question=q.question,
                answer=q.answer,
                produced=produced,
                correct=q.answer in produced,
                n_searches=sum(1 for e in trace.entries if e.call_name == "archival_search"),
            )
        )
    return _result("paged", k, outcomes)


def _result(mode: str, k: int, outcomes: list[QuestionOutcome]) -> DocqaResult:
    acc = sum(1 for o in outcomes if o.correct) / len(outcomes) if outcomes else 0.0
    return DocqaResult(mode=mode, k=k, accuracy=acc, outcomes=tuple(outcomes))
