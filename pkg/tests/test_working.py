from __future__ import annotations

import pytest

from tiermem.errors import CapacityExceeded, EmptyFragment, NotFound
from tiermem.working import WorkingContext


def test_append_joins_with_newline():
    wc = WorkingContext(text="", cap=100)
    wc = wc.append("user prefers metric units")
    wc = wc.append("user is in UTC+2")
    assert wc.text == "user prefers metric units\nuser is in UTC+2"


def test_append_rejects_empty():
    wc = WorkingContext(text="", cap=100)
    with pytest.raises(EmptyFragment):
        wc.append("   ")


def test_append_over_cap_mentions_escape_hatches():
    wc = WorkingContext(text="", cap=4)  # 20 chars
    with pytest.raises(CapacityExceeded) as exc:
        wc.append("x" * 30)
    msg = str(exc.value)
    assert "archival_insert" in msg
    assert "working_context_replace" in msg


def test_replace_first_occurrence_only():
    wc = WorkingContext(text="alpha beta alpha", cap=100)
    wc = wc.replace_first("alpha", "gamma")
    assert wc.text == "gamma beta alpha"


def test_replace_missing_raises():
    wc = WorkingContext(text="alpha", cap=100)
    with pytest.raises(NotFound):
        wc.replace_first("zeta", "eta")


def test_replace_cannot_blow_cap():
    wc = WorkingContext(text="ab", cap=1)
    with pytest.raises(CapacityExceeded):
        wc.replace_first("ab", "abcdefgh")


def test_replace_to_empty_is_deletion():
    wc = WorkingContext(text="keep drop keep", cap=100)
    wc = wc.replace_first(" drop", "")
    assert wc.text == "keep keep"


def test_instances_are_immutable():
    wc = WorkingContext(text="original", cap=100)
    wc.append("more")
    assert wc.text == "original"
