"""Attribute dictionary data model: canonical entries, signed queries, merge.

Does: canonical (key, value) facts, unsigned dictionaries describing one
item, signed query dictionaries with per-entry polarity, and the merge
rule that combines a reference dictionary with parsed edit updates.
Everything here is immutable and pure; downstream modules rely on the
canonical ordering for reproducible serialization and hashing.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ContradictoryUpdates, EmptyField, ReservedCharacter

_WHITESPACE_RUN = re.compile(r"\s+")


def _canonical_token(raw: str, side: str) -> str:
    # Lowercase, trim, collapse internal whitespace runs to single spaces.
    token = _WHITESPACE_RUN.sub(" ", raw.strip()).lower()
    if not token:
        raise EmptyField(f"{side} is empty after trimming")
    if ":" in token or ";" in token:
        raise ReservedCharacter(f"{side} {token!r} contains a reserved character (':' or ';')")
    return token


@dataclass(frozen=True, order=True)
class AttributeEntry:
    """One canonical (key, value) fact.

    Construction normalizes both fields: lowercased, trimmed, internal
    whitespace collapsed. Empty fields and the reserved characters ':'
    and ';' are rejected.
    """

    key: str
    value: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "key", _canonical_token(self.key, "key"))
        object.__setattr__(self, "value", _canonical_token(self.value, "value"))


def canonicalize(raw_key: str, raw_value: str) -> AttributeEntry:
    """Build a canonical AttributeEntry from arbitrary strings."""
    return AttributeEntry(raw_key, raw_value)


class Polarity(enum.IntEnum):
    """Per-entry intent sign: desired, open anchor, or avoided."""

    POSITIVE = 1
    OPEN = 0
    NEGATIVE = -1


# Canonical polarity group order: POSITIVE, then OPEN, then NEGATIVE.
_POLARITY_RANK = {Polarity.POSITIVE: 0, Polarity.OPEN: 1, Polarity.NEGATIVE: 2}


@dataclass(frozen=True)
class SignedEntry:
    """An AttributeEntry plus its polarity."""

    entry: AttributeEntry
    polarity: Polarity

    def sort_key(self) -> tuple[int, str, str]:
        return (_POLARITY_RANK[self.polarity], self.entry.key, self.entry.value)


@dataclass(frozen=True)
class VisualDictionary:
    """Ordered set of unsigned attribute facts describing one item.

    Duplicate (key, value) pairs collapse; multiple values per key are
    allowed. Iteration is canonical: ascending by key, then value.
    """

    entries: tuple[AttributeEntry, ...] = ()

    def __post_init__(self) -> None:
        deduped = sorted(set(self.entries))
        object.__setattr__(self, "entries", tuple(deduped))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "VisualDictionary":
        return cls(tuple(canonicalize(k, v) for k, v in pairs))

    def __iter__(self) -> Iterator[AttributeEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, entry: AttributeEntry) -> bool:
        return entry in self.entries

    def as_pairs(self) -> list[tuple[str, str]]:
        return [(e.key, e.value) for e in self.entries]


@dataclass(frozen=True)
class QueryDictionary:
    """Ordered set of signed attribute facts.

    Invariants enforced at construction: no duplicate (key, value,
    polarity) triples, no (key, value) pair carrying both POSITIVE and
    NEGATIVE polarity, canonical order (polarity group, key, value).
    """

    entries: tuple[SignedEntry, ...] = ()

    def __post_init__(self) -> None:
        deduped = sorted(set(self.entries), key=SignedEntry.sort_key)
        pairs_by_polarity: dict[Polarity, set[AttributeEntry]] = {p: set() for p in Polarity}
        for signed in deduped:
            pairs_by_polarity[signed.polarity].add(signed.entry)
        conflict = pairs_by_polarity[Polarity.POSITIVE] & pairs_by_polarity[Polarity.NEGATIVE]
        if conflict:
            first = sorted(conflict)[0]
            raise ContradictoryUpdates(
                f"({first.key}, {first.value}) appears with both POSITIVE and NEGATIVE polarity"
            )
        object.__setattr__(self, "entries", tuple(deduped))

    def __iter__(self) -> Iterator[SignedEntry]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def merge(reference: VisualDictionary, updates: Iterable[SignedEntry]) -> QueryDictionary:
    """Combine a reference dictionary with signed edit updates.

    Updates override reference entries on the same key: a reference entry
    whose key is touched by any update (either polarity) is dropped, and
    every untouched reference entry becomes an OPEN anchor. Positive and
    negative updates pass through with their polarity.

    Args:
        reference: the unsigned reference dictionary.
        updates: signed entries with POSITIVE or NEGATIVE polarity only.

    Raises:
        ValueError: if an update carries OPEN polarity (OPEN is derived,
            never authored).
        ContradictoryUpdates: if some (key, value) appears with both
            polarities among the updates.
    """
    update_list = list(updates)
    for signed in update_list:
        if signed.polarity is Polarity.OPEN:
            raise ValueError("updates must not carry OPEN polarity")
    touched_keys = {signed.entry.key for signed in update_list}
    merged = list(update_list)
    merged.extend(
        SignedEntry(entry, Polarity.OPEN)
        for entry in reference
        if entry.key not in touched_keys
    )
    return QueryDictionary(tuple(merged))


def serialize(entries: Iterable[AttributeEntry]) -> str:
    """Render entries as ``key:value; key:value`` (no trailing separator)."""
    return "; ".join(f"{e.key}:{e.value}" for e in entries)


def split_by_polarity(
    q: QueryDictionary,
) -> tuple[list[AttributeEntry], list[AttributeEntry], list[AttributeEntry]]:
    """Partition a query dictionary into (positive, open, negative) entry lists.

    Each list is in canonical (key, value) order; polarity restored over
    the three lists reassembles the query exactly.
    """
    positive = [s.entry for s in q if s.polarity is Polarity.POSITIVE]
    opened = [s.entry for s in q if s.polarity is Polarity.OPEN]
    negative = [s.entry for s in q if s.polarity is Polarity.NEGATIVE]
    return positive, opened, negative
