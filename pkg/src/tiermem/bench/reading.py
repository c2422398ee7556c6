"""Helpers for scripted policies that read the composed document.

A policy sees exactly what a model would see: the full composed text. These
helpers pull out the pieces policies react to — the latest function result
and the items inside a rendered result page.
"""

from __future__ import annotations

import re

_RESULT_LINE = re.compile(r"^\[[^\]]+\] function_result msg-\d+: (.*)$", re.MULTILINE)

# Items render as `N. payload`, joined by ` || `; recall items carry a
# nested `[ts] role id: text` prefix, archival items a `(score=...)` prefix.
_RECALL_ITEM = re.compile(r"\d+\. \[[^\]]+\] (\w+) msg-\d+: (.*?)(?= \|\| \d+\. |$)")
_SCORED_ITEM = re.compile(r"\d+\. \(score=[-0-9.]+\) (.*?)(?= \|\| \d+\. |$)")


def last_result(prompt: str) -> str:
    """Text of the newest function_result line, or '' if none."""
    hits = _RESULT_LINE.findall(prompt)
    return hits[-1] if hits else ""


def recall_items(result_line: str) -> list[tuple[str, str]]:
    """(role, text) pairs from a rendered recall-search result."""
    return [(m.group(1), m.group(2)) for m in _RECALL_ITEM.finditer(result_line)]


def scored_items(result_line: str) -> list[str]:
    """Item texts from a rendered archival-search result."""
    return [m.group(1) for m in _SCORED_ITEM.finditer(result_line)]


def has_more(result_line: str) -> bool:
    return "has_more=true" in result_line
