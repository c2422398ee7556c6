"""tiermem: a tiered-memory runtime for fixed-window text processors.

A small, fully deterministic core — bounded main context with eviction into
a rolling summary, verbatim recall log, similarity-searched archival store —
driven by a processor through a self-directed function layer.
"""

from .agent import Agent, AgentConfig, Event, StepTrace, TraceEntry, build_instructions
from .context import MainContext, TokenBudget, compose, default_budget
from .embeddings import HashedBagEmbedder, cosine
from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    CorruptSnapshot,
    CycleDetected,
    DuplicateName,
    EmptyFragment,
    EmptyText,
    IdCollision,
    InvalidRange,
    MessageTooLarge,
    NotFound,
    OutOfOrder,
    ProcessorUnavailable,
    SummaryTooLarge,
    TierMemError,
    TooFewFragments,
)
from .functions import (
    FunctionCall,
    FunctionSchema,
    ParamSpec,
    ParseError,
    ParsedOutput,
    ValidatedCall,
    ValidationError,
    default_registry,
    execute,
    parse_output,
    render_output,
    render_schema,
    validate,
)
from .messages import Message, new_message, render_message
from .processors import (
    CallableProcessor,
    EchoProcessor,
    HttpProcessor,
    ScriptedProcessor,
)
from .queueing import (
    PRESSURE_WARNING_TEXT,
    ConversationQueue,
    EvictResult,
    truncation_summarizer,
)
from .stores import ArchivalStore, Page, RecallStore, ScoredEntry
from .tokens import count_tokens
from .working import WorkingContext

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AgentConfig",
    "ArchivalStore",
    "BudgetExceeded",
    "CallableProcessor",
    "CapacityExceeded",
    "ConversationQueue",
    "CorruptSnapshot",
    "CycleDetected",
    "DuplicateName",
    "EchoProcessor",
    "EmptyFragment",
    "EmptyText",
    "Event",
    "EvictResult",
    "FunctionCall",
    "FunctionSchema",
    "HashedBagEmbedder",
    "HttpProcessor",
    "IdCollision",
    "InvalidRange",
    "MainContext",
    "Message",
    "MessageTooLarge",
    "NotFound",
    "OutOfOrder",
    "Page",
    "ParamSpec",
    "ParseError",
    "ParsedOutput",
    "PRESSURE_WARNING_TEXT",
    "ProcessorUnavailable",
    "RecallStore",
    "ScoredEntry",
    "ScriptedProcessor",
    "StepTrace",
    "SummaryTooLarge",
    "TierMemError",
    "TokenBudget",
    "TooFewFragments",
    "TraceEntry",
    "ValidatedCall",
    "ValidationError",
    "WorkingContext",
    "build_instructions",
    "compose",
    "cosine",
    "count_tokens",
    "default_budget",
    "default_registry",
    "execute",
    "new_message",
    "parse_output",
    "render_message",
    "render_output",
    "render_schema",
    "truncation_summarizer",
    "validate",
]
