"""Benchmark harness: synthetic tasks, scripted policies, and metrics.

Everything here is deterministic given its seeds, so results freeze into
tests. The scripted policies stand in for a real processor: they read the
composed document exactly the way a model would (latest function result,
pressure warnings) and steer the agent through the public function layer
only.
"""

from .dmr import N_SESSIONS, DmrCase, DmrResult, default_dmr_config, gen_dmr, run_dmr
from .docqa import (
    DocqaQuestion,
    DocqaResult,
    QuestionOutcome,
    question_keyword,
    run_docqa,
    synthetic_docqa_fixture,
)
from .kv import (
    DEPTHS,
    N_PAIRS,
    KvDataset,
    KvPair,
    KvResult,
    default_kv_config,
    gen_kv,
    ingest_lines,
    kv_oracle,
    run_kv,
    run_kv_truncation_baseline,
)
from .metrics import CsimScore, RougeScore, csim, lcs_len, rouge_l

__all__ = [
    "CsimScore",
    "DEPTHS",
    "DmrCase",
    "DmrResult",
    "DocqaQuestion",
    "DocqaResult",
    "KvDataset",
    "KvPair",
    "KvResult",
    "N_PAIRS",
    "N_SESSIONS",
    "QuestionOutcome",
    "RougeScore",
    "csim",
    "default_dmr_config",
    "default_kv_config",
    "gen_dmr",
    "gen_kv",
    "ingest_lines",
    "kv_oracle",
    "lcs_len",
    "question_keyword",
    "rouge_l",
    "run_dmr",
    "run_docqa",
    "run_kv",
    "run_kv_truncation_baseline",
    "synthetic_docqa_fixture",
]
