"""Exception types shared across the engine.

Every error carries a machine-readable ``code`` (the class name) so the
HTTP service and CLI can report failures without string matching.
"""

from __future__ import annotations


class AttrieveError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class EmptyField(AttrieveError):
    """A key or value is empty after trimming."""


class ReservedCharacter(AttrieveError):
    """A key or value contains ':' or ';', which serialization reserves."""


class ContradictoryUpdates(AttrieveError):
    """The same (key, value) pair appears with both polarities."""


class UnparsableClause(AttrieveError):
    """An edit clause matched no grammar pattern.

    ``span`` is the (start, end) character range of the offending clause
    in the original input, end-exclusive.
    """

    def __init__(self, message: str, span: tuple[int, int]):
        super().__init__(message)
        self.span = span


class RemoteUnavailable(AttrieveError):
    """A remote endpoint could not be reached or kept failing."""


class MalformedRemoteResponse(AttrieveError):
    """A remote endpoint answered with something outside its protocol.

    ``payload`` holds the raw response body for diagnostics.
    """

    def __init__(self, message: str, payload: object = None):
        super().__init__(message)
        self.payload = payload


class DimensionMismatch(AttrieveError):
    """Vector dimensions disagree."""


class DuplicateId(AttrieveError):
    """Two gallery items share an id."""


class CorruptIndex(AttrieveError):
    """An index file failed its magic, structure, or checksum validation."""


class FingerprintMismatch(AttrieveError):
    """The query-side embedder config differs from the one the index was built with."""


class EmptyPool(AttrieveError):
    """Reranking was asked to select from an empty pool."""


class KTooLarge(AttrieveError):
    """Reranking was asked for more items than the pool holds."""


class MissingRanking(AttrieveError):
    """A query has no ranking to evaluate."""


class UnknownCandidateId(AttrieveError):
    """A ranking references an id absent from the gallery."""


class SchemaTooSmall(AttrieveError):
    """The synthetic schema is empty or a key offers fewer than two values."""
