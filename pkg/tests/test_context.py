from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiermem.context import (
    COMPOSE_OVERHEAD_TOKENS,
    QUEUE_HEADER,
    WORKING_HEADER,
    MainContext,
    TokenBudget,
    compose,
    default_budget,
    queue_tokens,
)
from tiermem.errors import BudgetExceeded
from tiermem.messages import render_message, rendered_tokens
from tiermem.tokens import count_tokens

from conftest import MessageFactory


def test_budget_rejects_overcommit():
    with pytest.raises(ValueError):
        TokenBudget(total=100, system_reserved=50, working_cap=30, queue_cap=30)


def test_budget_rejects_negative():
    with pytest.raises(ValueError):
        TokenBudget(total=100, system_reserved=-1, working_cap=0, queue_cap=0)


def test_default_budget_split_frozen():
    # instructions of 100 chars -> 20 tokens, reserved = 20 + 12 = 32
    # remainder 4096 - 32 = 4064; working = 1016, queue = 3048
    b = default_budget(4096, "x" * 100)
    assert b == TokenBudget(total=4096, system_reserved=32, working_cap=1016, queue_cap=3048)
    assert b.system_reserved + b.working_cap + b.queue_cap == 4096


def test_default_budget_small_total():
    b = default_budget(256, "hi")
    assert b.system_reserved == count_tokens("hi") + COMPOSE_OVERHEAD_TOKENS
    assert b.system_reserved + b.working_cap + b.queue_cap <= 256


def test_compose_order_and_headers(mk: MessageFactory):
    msgs = (mk("user", "first"), mk("assistant", "second"))
    ctx = MainContext(
        system_instructions="INSTRUCTIONS",
        working_context="notes here",
        queue=msgs,
    )
    budget = default_budget(4096, ctx.system_instructions)
    doc = compose(ctx, budget)
    lines = doc.split("\n")
    assert lines[0] == "INSTRUCTIONS"
    assert lines[1] == ""
    assert lines[2] == WORKING_HEADER
    assert lines[3] == "notes here"
    assert lines[4] == ""
    assert lines[5] == QUEUE_HEADER
    assert lines[6] == render_message(msgs[0])
    assert lines[7] == render_message(msgs[1])
    # the instruction block comes before everything else, always
    assert doc.index("INSTRUCTIONS") < doc.index(WORKING_HEADER) < doc.index(QUEUE_HEADER)


def test_compose_total_within_budget(mk: MessageFactory):
    ctx = MainContext(
        system_instructions="I" * 50,
        working_context="w" * 200,
        queue=(mk("user", "hello"),),
    )
    budget = default_budget(1024, ctx.system_instructions)
    doc = compose(ctx, budget)
    assert count_tokens(doc) <= budget.total


def test_compose_rejects_oversized_instructions():
    ctx = MainContext(system_instructions="I" * 500, working_context="", queue=())
    budget = TokenBudget(total=1000, system_reserved=20, working_cap=100, queue_cap=100)
    with pytest.raises(BudgetExceeded):
        compose(ctx, budget)


def test_compose_rejects_oversized_working_context():
    ctx = MainContext(system_instructions="x", working_context="w" * 600, queue=())
    budget = TokenBudget(total=1000, system_reserved=20, working_cap=100, queue_cap=100)
    with pytest.raises(BudgetExceeded):
        compose(ctx, budget)


def test_compose_rejects_oversized_queue(mk: MessageFactory):
    ctx = MainContext(
        system_instructions="x",
        working_context="",
        queue=(mk("user", "q" * 600),),
    )
    budget = TokenBudget(total=1000, system_reserved=20, working_cap=100, queue_cap=100)
    with pytest.raises(BudgetExceeded):
        compose(ctx, budget)


def test_queue_tokens_charges_separators(mk: MessageFactory):
    msgs = (mk("user", "aaa"), mk("user", "bbb"))
    assert queue_tokens(msgs) == sum(rendered_tokens(m) for m in msgs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(min_size=1, max_size=80), max_size=12))
def test_compose_respects_part_caps_structurally(texts):
    # messages admitted under the per-part caps always compose under total
    mk2 = MessageFactory()
    budget = default_budget(2048, "SYS")
    queue, used = [], 0
    for t in texts:
        m = mk2("user", t)
        cost = rendered_tokens(m)
        if used + cost <= budget.queue_cap:
            queue.append(m)
            used += cost
    ctx = MainContext(system_instructions="SYS", working_context="", queue=tuple(queue))
    assert count_tokens(compose(ctx, budget)) <= budget.total
