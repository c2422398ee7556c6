"""Token counting.

The runtime never talks to a real tokenizer; budgets are enforced against a
character heuristic calibrated so ~250 characters cost ~50 tokens. Anything
that satisfies ``Tokenizer`` can be plugged in instead (the agent config
carries the binding), but every default path uses the heuristic so budget
math stays deterministic in tests.
"""

from __future__ import annotations

import math
from typing import Protocol

# Calibration: five characters per token on average prose.
CHARS_PER_TOKEN = 5


class Tokenizer(Protocol):
    def count(self, text: str) -> int: ...


class HeuristicTokenizer:
    """ceil(len/5) byte-free token estimate. Empty text costs nothing."""

    def count(self, text: str) -> int:
        if not text:
            return 0
        return math.ceil(len(text) / CHARS_PER_TOKEN)


_DEFAULT = HeuristicTokenizer()


def count_tokens(text: str, tokenizer: Tokenizer | None = None) -> int:
    return (tokenizer or _DEFAULT).count(text)
