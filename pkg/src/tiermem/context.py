"""Main-context composition under a fixed token budget.

The composed document is the only thing a processor ever sees. It has three
parts in a fixed order: pinned system instructions, the editable working
context, and the conversation queue (newest last, preceded by the rolling
summary when one exists). Each part is capped separately; the caps plus a
small fixed header allowance must fit inside the total.

The token heuristic is subadditive under concatenation (ceil(a/5) + ceil(b/5)
>= ceil((a+b)/5)), so enforcing the per-part caps is enough to guarantee the
final document never exceeds the total. compose() re-checks the total anyway;
a violation there means a bookkeeping bug upstream, not a recoverable
condition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceeded
from .messages import Message, render_message, rendered_tokens
from .tokens import Tokenizer, count_tokens

WORKING_HEADER = "### WORKING CONTEXT"
QUEUE_HEADER = "### CONVERSATION"

# Covers the two section headers plus joining blank lines, with slack.
COMPOSE_OVERHEAD_TOKENS = 12


@dataclass(frozen=True, slots=True)
class TokenBudget:
    total: int
    system_reserved: int
    working_cap: int
    queue_cap: int

    def __post_init__(self) -> None:
        parts = (self.total, self.system_reserved, self.working_cap, self.queue_cap)
        if any(p < 0 for p in parts):
            raise ValueError("budget components must be non-negative")
        if self.system_reserved + self.working_cap + self.queue_cap > self.total:
            raise ValueError("budget parts exceed the total")


def default_budget(
    total: int,
    system_instructions: str,
    tokenizer: Tokenizer | None = None,
) -> TokenBudget:
    """Reserve the instructions' actual size (plus header allowance), then
    split the remainder 25% working context / 75% queue."""
    reserved = count_tokens(system_instructions, tokenizer) + COMPOSE_OVERHEAD_TOKENS
    remainder = total - reserved
    if remainder < 2:
        raise ValueError(
            f"budget of {total} tokens cannot hold {reserved} reserved tokens"
        )
    working = remainder // 4
    return TokenBudget(
        total=total,
        system_reserved=reserved,
        working_cap=working,
        queue_cap=remainder - working,
    )


@dataclass(frozen=True, slots=True)
class MainContext:
    """Snapshot of everything composable. The queue tuple already has the
    rolling summary first when one exists."""

    system_instructions: str
    working_context: str
    queue: tuple[Message, ...]


def queue_tokens(queue: tuple[Message, ...], tokenizer: Tokenizer | None = None) -> int:
    return sum(rendered_tokens(m, tokenizer) for m in queue)


def compose(ctx: MainContext, budget: TokenBudget, tokenizer: Tokenizer | None = None) -> str:
    instr_cost = count_tokens(ctx.system_instructions, tokenizer) + COMPOSE_OVERHEAD_TOKENS
    if instr_cost > budget.system_reserved:
        raise BudgetExceeded(
            f"system instructions need {instr_cost} tokens, "
            f"reserved {budget.system_reserved}"
        )
    wc_cost = count_tokens(ctx.working_context, tokenizer)
    if wc_cost > budget.working_cap:
        raise BudgetExceeded(
            f"working context at {wc_cost} tokens exceeds cap {budget.working_cap}"
        )
    q_cost = queue_tokens(ctx.queue, tokenizer)
    if q_cost > budget.queue_cap:
        raise BudgetExceeded(
            f"queue at {q_cost} tokens exceeds cap {budget.queue_cap}"
        )

    parts = [ctx.system_instructions, "", WORKING_HEADER, ctx.working_context, "", QUEUE_HEADER]
    parts.extend(render_message(m) for m in ctx.queue)
    doc = "\n".join(parts)

    doc_cost = count_tokens(doc, tokenizer)
    if doc_cost > budget.total:
        raise BudgetExceeded(
            f"composed document at {doc_cost} tokens exceeds total {budget.total}"
        )
    return doc
