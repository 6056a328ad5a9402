"""Exception taxonomy shared across the engine.

Lookup misses and parse failures are modelled as result values, not
exceptions; the classes here cover structural errors that abort an
operation outright.
"""

from __future__ import annotations


class QueryEngineError(Exception):
    """Base class for all engine errors."""


class HeaderMismatch(QueryEngineError):
    """CSV header line does not match the required column set/order."""


class RowError(QueryEngineError):
    """A CSV row failed validation; carries the 1-based line number."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateKey(QueryEngineError):
    """Two rows collide on (list_id, year, rank) or (list_id, year, company)."""

    def __init__(self, key: tuple):
        super().__init__(f"duplicate key {key!r}")
        self.key = key


class UnknownList(QueryEngineError):
    """Requested list_id is not present in the dataset."""


class MalformedRange(QueryEngineError):
    """A year range was given with start > end."""


class InvalidPlan(QueryEngineError):
    """A plan violates its structural invariants (direct-API misuse)."""


class ExecError(QueryEngineError):
    """Plan execution failed at runtime.

    ``kind`` is one of ``budget``, ``empty``, ``column_absent``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message


class DuplicateDocId(QueryEngineError):
    """Two corpus documents share a doc_id."""


class BadWeights(QueryEngineError):
    """Re-ranking weights do not sum to 1."""


class EmptyRange(QueryEngineError):
    """Trend query range has start > end."""


class TooFewBuckets(QueryEngineError):
    """Trend summary needs at least two buckets."""


class LexiconLoadError(QueryEngineError):
    """Guardrail lexicon file is missing or malformed."""


class TemplateError(QueryEngineError):
    """A benchmark template references an unknown slot."""


class EmptySuite(QueryEngineError):
    """A safety prompt suite contains no prompts."""


class ConfigError(QueryEngineError):
    """Service or grammar configuration is invalid."""
