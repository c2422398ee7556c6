"""Deterministic text metrics: ROUGE-L and opener similarity.

ROUGE-L works on lowercase whitespace tokens. Precision is LCS over the
candidate length, recall is LCS over the reference length, F1 the harmonic
mean; any empty side yields all zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from ..embeddings import Embedder, HashedBagEmbedder, cosine
from ..errors import TooFewFragments


@dataclass(frozen=True, slots=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _tokens(text: str) -> list[str]:
    return text.lower().split()


def lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    """Classic O(len(a)*len(b)) dynamic program, one rolling row."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[len(b)]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    cand = _tokens(candidate)
    ref = _tokens(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = lcs_len(cand, ref)
    if lcs == 0:
        return RougeScore(0.0, 0.0, 0.0)
    p = lcs / len(cand)
    r = lcs / len(ref)
    return RougeScore(p, r, 2 * p * r / (p + r))


@dataclass(frozen=True, slots=True)
class CsimScore:
    csim1: float  # best single-fragment similarity
    csim3: float  # mean of the top three
    csim_h: float  # similarity to the human-written opener


def csim(
    opener: str,
    fragments: Sequence[str],
    human_opener: str,
    embedder: Optional[Embedder] = None,
) -> CsimScore:
    """Embedding similarity of a generated opener against persona fragments
    and a human-written opener. Needs at least three fragments so the top-3
    mean is well-defined; csim1 >= csim3 by construction (a max dominates
    any mean that includes it)."""
    if len(fragments) < 3:
        raise TooFewFragments(f"need at least 3 fragments, got {len(fragments)}")
    emb = embedder or HashedBagEmbedder()
    opener_vec = emb.embed(opener)
    sims = sorted((cosine(opener_vec, emb.embed(f)) for f in fragments), reverse=True)
    return CsimScore(
        csim1=sims[0],
        csim3=sum(sims[:3]) / 3.0,
        csim_h=cosine(opener_vec, emb.embed(human_opener)),
    )
