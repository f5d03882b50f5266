"""Edit-instruction parser: deterministic grammar for signed updates.

Converts an edit string into signed (key, value, polarity) updates,
clause by clause. Clauses are separated by ',', ';', or the word
"and". Two clause shapes are accepted:

  structured:  +key:value        -key:value
  phrase:      add|set|make|with KEY VALUE...      (positive)
               change KEY to VALUE...              (positive)
               remove|drop|no|without KEY VALUE... (negative)

In phrase forms the first token after the verb is the key and the
remainder is the value. Anything else fails loudly with the clause's
character span; clauses are never silently dropped. A remote
decomposition service can stand in for the grammar via
``decompose_remote``; its responses must use the structured form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import requests

from .dictionary import AttributeEntry, Polarity, SignedEntry
from .errors import (
    AttrieveError,
    ContradictoryUpdates,
    EmptyField,
    MalformedRemoteResponse,
    RemoteUnavailable,
    ReservedCharacter,
    UnparsableClause,
)

_SEPARATOR = re.compile(r"[,;]|\s+and\s+", re.IGNORECASE)

_POSITIVE_VERBS = frozenset({"add", "set", "make", "with"})
_NEGATIVE_VERBS = frozenset({"remove", "drop", "no", "without"})

# Coreference is out of scope, so pronouns cannot serve as keys; a clause
# like "make it fabulous" must fail rather than parse as key="it".
_PRONOUN_KEYS = frozenset({"it", "this", "that", "them", "these", "those"})


@dataclass(frozen=True)
class EditProgram:
    """Parsed edit: signed updates plus their source spans.

    ``source_spans[i]`` is the (start, end) character range (end
    exclusive) of the clause that produced ``updates[i]``. Update order
    equals clause order in the input.
    """

    updates: tuple[SignedEntry, ...] = ()
    source_spans: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        assert len(self.updates) == len(self.source_spans)


def _clause_spans(text: str) -> list[tuple[int, int]]:
    """Split on separators and return the stripped extent of each clause."""
    cuts = [0]
    for m in _SEPARATOR.finditer(text):
        cuts.append(m.start())
        cuts.append(m.end())
    cuts.append(len(text))
    spans = []
    for start, end in zip(cuts[::2], cuts[1::2]):
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            spans.append((start, end))
    return spans


def _parse_structured_clause(clause: str, span: tuple[int, int]) -> SignedEntry:
    polarity = Polarity.POSITIVE if clause[0] == "+" else Polarity.NEGATIVE
    body = clause[1:]
    if ":" not in body:
        raise UnparsableClause(f"structured clause {clause!r} lacks ':'", span)
    raw_key, raw_value = body.split(":", 1)
    try:
        entry = AttributeEntry(raw_key, raw_value)
    except (EmptyField, ReservedCharacter) as exc:
        raise UnparsableClause(f"structured clause {clause!r}: {exc}", span) from exc
    return SignedEntry(entry, polarity)


def _parse_phrase_clause(clause: str, span: tuple[int, int]) -> SignedEntry:
    tokens = clause.split()
    verb = tokens[0].lower()
    if verb in _POSITIVE_VERBS:
        polarity, operands = Polarity.POSITIVE, tokens[1:]
    elif verb in _NEGATIVE_VERBS:
        polarity, operands = Polarity.NEGATIVE, tokens[1:]
    elif verb == "change":
        # change KEY to VALUE...
        if len(tokens) < 4 or tokens[2].lower() != "to":
            raise UnparsableClause(f"clause {clause!r} is not 'change KEY to VALUE'", span)
        polarity, operands = Polarity.POSITIVE, [tokens[1]] + tokens[3:]
    else:
        raise UnparsableClause(f"clause {clause!r} matches no edit pattern", span)
    if len(operands) < 2:
        raise UnparsableClause(f"clause {clause!r} needs a key and a value", span)
    key, value = operands[0], " ".join(operands[1:])
    if key.lower() in _PRONOUN_KEYS:
        raise UnparsableClause(f"clause {clause!r} uses a pronoun where a key is required", span)
    try:
        entry = AttributeEntry(key, value)
    except (EmptyField, ReservedCharacter) as exc:
        raise UnparsableClause(f"clause {clause!r}: {exc}", span) from exc
    return SignedEntry(entry, polarity)


def _check_contradictions(updates: list[SignedEntry]) -> None:
    positive = {s.entry for s in updates if s.polarity is Polarity.POSITIVE}
    negative = {s.entry for s in updates if s.polarity is Polarity.NEGATIVE}
    conflict = positive & negative
    if conflict:
        first = sorted(conflict)[0]
        raise ContradictoryUpdates(
            f"({first.key}, {first.value}) requested with both POSITIVE and NEGATIVE polarity"
        )


def _parse(text: str, structured_only: bool) -> EditProgram:
    updates: list[SignedEntry] = []
    spans: list[tuple[int, int]] = []
    for span in _clause_spans(text):
        clause = text[span[0] : span[1]]
        if clause[0] in "+-":
            updates.append(_parse_structured_clause(clause, span))
        elif structured_only:
            raise UnparsableClause(f"clause {clause!r} is not in structured form", span)
        else:
            updates.append(_parse_phrase_clause(clause, span))
        spans.append(span)
    _check_contradictions(updates)
    return EditProgram(tuple(updates), tuple(spans))


def parse_edit(text: str) -> EditProgram:
    """Parse an edit string into an EditProgram.

    Raises UnparsableClause (with the clause span) for the first clause
    matching no pattern, ContradictoryUpdates when a (key, value) pair is
    both requested and forbidden. The empty string parses to an empty
    program.
    """
    return _parse(text, structured_only=False)


def render_structured(program: EditProgram) -> str:
    """Render a program back to the structured form parse_edit accepts."""
    parts = []
    for signed in program.updates:
        sign = "+" if signed.polarity is Polarity.POSITIVE else "-"
        parts.append(f"{sign}{signed.entry.key}:{signed.entry.value}")
    return "; ".join(parts)


def decompose_remote(text: str, endpoint: str, timeout: float = 10.0) -> EditProgram:
    """Ask a remote decomposition service to translate an edit string.

    The raw edit text is POSTed as UTF-8; the response body must be a
    structured-form edit string, which is parsed and validated exactly
    like parse_edit input. Any response outside the structured grammar
    (including contradictions) raises MalformedRemoteResponse with the
    raw payload attached.
    """
    try:
        response = requests.post(
            endpoint,
            data=text.encode("utf-8"),
            headers={"Content-Type": "text/plain; charset=utf-8"},
            timeout=timeout,
        )
    except requests.RequestException as exc:
        raise RemoteUnavailable(f"decomposition endpoint {endpoint} unreachable: {exc}") from exc
    if response.status_code != 200:
        raise RemoteUnavailable(
            f"decomposition endpoint {endpoint} returned HTTP {response.status_code}"
        )
    payload = response.text
    try:
        return _parse(payload, structured_only=True)
    except AttrieveError as exc:
        raise MalformedRemoteResponse(
            f"remote decomposition response is not structured-form: {exc}", payload=payload
        ) from exc
