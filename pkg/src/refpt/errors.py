"""Exception types shared across the engine.

Every error raised by refpt derives from RefptError so callers (CLI, HTTP
layer) can catch one base class and map it to an exit code / status code.
"""

from __future__ import annotations


class RefptError(Exception):
    """Base class for all refpt errors."""


# --- knowledge base ---------------------------------------------------------

class MalformedEntry(RefptError):
    """A source entry is missing required fields or is internally inconsistent."""


class DanglingLineage(RefptError):
    """A source entry declares a parent id that exists neither in the batch nor the store."""


class RewriterFailure(RefptError):
    """The perspective rewriter session returned unparseable output."""


class DimensionMismatch(RefptError):
    """An embedding vector does not match the store's declared dimension."""


class EmptyTier(RefptError):
    """A retrieval tier has no candidates (after lineage restriction)."""


class UnknownRecordId(RefptError):
    """Lookup of a record id that is not in the store."""


# --- stage machine ----------------------------------------------------------

class TerminalStepAttempt(RefptError):
    """step() was called on a machine that already reached the terminal stage."""


class AmbiguousEvent(RefptError):
    """The event leaves the current stage's decision signal unknown."""

    def __init__(self, stage: str, signal: str):
        super().__init__(f"event does not resolve signal {signal!r} required at stage {stage!r}")
        self.stage = stage
        self.signal = signal


# --- gateway ----------------------------------------------------------------

class BackendUnavailable(RefptError):
    """The completion/embedding backend could not be reached or errored."""


class EmbeddingBackendUnavailable(BackendUnavailable):
    """The embedding backend could not be reached or errored."""


class SchemaViolation(RefptError):
    """A session response failed schema validation (after any permitted retry)."""


class NoScriptMatch(RefptError):
    """No scripted backend entry matched the role/prompt pair."""


class EmptyText(RefptError):
    """Text submitted for embedding is empty or has no embeddable content."""


# --- orchestrator -----------------------------------------------------------

class WrongPhase(RefptError):
    """A session operation was called out of phase."""

    def __init__(self, expected: str, actual: str):
        super().__init__(f"session expects {expected}, but is {actual}")
        self.expected = expected
        self.actual = actual


class StoreLoadFailure(RefptError):
    """The knowledge-store file could not be loaded."""


class BackendConfigError(RefptError):
    """Backend configuration is missing or inconsistent."""


class TranscriptMismatch(RefptError):
    """Replay of a transcript diverged from the recorded entries."""
