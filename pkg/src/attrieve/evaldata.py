"""Benchmark file formats: gallery and query JSONL.

Gallery, one object per line:
    {"id": str, "dictionary": [{"key": str, "value": str}, ...], "tags": [str, ...]}
Queries, one object per line:
    {"query_id": str, "reference": [entry, ...], "edit": str, "target_id": str,
     "positive_constraints": [entry, ...], "negative_constraints": [entry, ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .dictionary import AttributeEntry, VisualDictionary
from .errors import ContradictoryUpdates
from .gallery import GalleryItem


@dataclass(frozen=True)
class BenchmarkQuery:
    """One evaluation query: reference dictionary, edit text, ground truth."""

    query_id: str
    reference: VisualDictionary
    edit: str
    target_id: str
    positive_constraints: tuple[AttributeEntry, ...] = ()
    negative_constraints: tuple[AttributeEntry, ...] = ()

    def __post_init__(self) -> None:
        overlap = set(self.positive_constraints) & set(self.negative_constraints)
        if overlap:
            first = sorted(overlap)[0]
            raise ContradictoryUpdates(
                f"query {self.query_id!r}: ({first.key}, {first.value}) is both a "
                "positive and a negative constraint"
            )


def _entries_to_json(entries: Iterable[AttributeEntry]) -> list[dict]:
    return [{"key": e.key, "value": e.value} for e in entries]


def _entries_from_json(objs: list[dict]) -> tuple[AttributeEntry, ...]:
    return tuple(AttributeEntry(o["key"], o["value"]) for o in objs)


def gallery_item_to_json(item: GalleryItem) -> dict:
    return {
        "id": item.id,
        "dictionary": _entries_to_json(item.dictionary),
        "tags": sorted(item.tags),
    }


def write_gallery_jsonl(items: Iterable[GalleryItem], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for item in items:
            fh.write(json.dumps(gallery_item_to_json(item), sort_keys=True) + "\n")


def read_gallery_jsonl(path: str | Path) -> list[GalleryItem]:
    items = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            dictionary = VisualDictionary(_entries_from_json(obj["dictionary"]))
            items.append(GalleryItem(obj["id"], dictionary, frozenset(obj.get("tags", []))))
    return items


def query_to_json(q: BenchmarkQuery) -> dict:
    return {
        "query_id": q.query_id,
        "reference": _entries_to_json(q.reference),
        "edit": q.edit,
        "target_id": q.target_id,
        "positive_constraints": _entries_to_json(q.positive_constraints),
        "negative_constraints": _entries_to_json(q.negative_constraints),
    }


def write_queries_jsonl(queries: Iterable[BenchmarkQuery], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for q in queries:
            fh.write(json.dumps(query_to_json(q), sort_keys=True) + "\n")


def read_queries_jsonl(path: str | Path) -> list[BenchmarkQuery]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            queries.append(
                BenchmarkQuery(
                    query_id=obj["query_id"],
                    reference=VisualDictionary(_entries_from_json(obj["reference"])),
                    edit=obj["edit"],
                    target_id=obj["target_id"],
                    positive_constraints=_entries_from_json(obj["positive_constraints"]),
                    negative_constraints=_entries_from_json(obj["negative_constraints"]),
                )
            )
    return queries
