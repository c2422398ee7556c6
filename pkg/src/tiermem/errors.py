"""Exception types shared across the runtime.

Errors that a processor is expected to recover from (bad function calls,
capacity limits) are raised by the owning module and converted to
function_result text by the execution layer; they never escape a step.
Errors that indicate a broken deployment (corrupt snapshot, unreachable
processor) do escape, on purpose.
"""


class TierMemError(Exception):
    """Base class for all runtime errors."""


class BudgetExceeded(TierMemError):
    """A composed document or one of its parts overran its token cap."""


class MessageTooLarge(TierMemError):
    """A single message cannot fit the queue cap; the caller must split it."""


class SummaryTooLarge(TierMemError):
    """A summarizer returned more tokens than the cap it was given."""


class CapacityExceeded(TierMemError):
    """Working context is full; content must move to archival storage."""


class EmptyFragment(TierMemError):
    """Append/replace was called with empty text."""


class NotFound(TierMemError):
    """Exact-match replace target is absent from the working context."""


class OutOfOrder(TierMemError):
    """Recall insert with a timestamp older than the newest entry."""


class IdCollision(TierMemError):
    """Recall insert with an id that is already stored."""


class InvalidRange(TierMemError):
    """Date search with start > end."""


class EmptyText(TierMemError):
    """Archival insert with empty text."""


class DuplicateName(TierMemError):
    """Two functions with the same name in one registry."""


class TooFewFragments(TierMemError):
    """Similarity scoring needs at least three reference fragments."""


class CycleDetected(TierMemError):
    """Key-value chain loops back on itself."""


class ProcessorUnavailable(TierMemError):
    """Transport-level processor failure; the step is rolled back."""


class CorruptSnapshot(TierMemError):
    """A persisted agent directory failed to load; names the failing part."""
