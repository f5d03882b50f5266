"""Gallery snapshot: items, precomputed embeddings, persistence, top-k.

The index is an immutable snapshot of (id, dictionary, tags) triples and
an N x d float32 embedding matrix, row-aligned with the items. Search is
exhaustive exact cosine: no approximate structures, so rankings are
deterministic and oracle-checkable. The on-disk format is little-endian:

    magic "P2K1" | version u32 | dimension u32 | count u32 |
    fingerprint u64 | N*d float32 vectors | json_len u32 |
    UTF-8 JSON block (ids, dictionaries, tags) | crc32 u32

The CRC covers every preceding byte.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dictionary import VisualDictionary, serialize
from .embedding import EmbedderConfig, embed_batch, embedder_fingerprint, similarities
from .errors import CorruptIndex, DimensionMismatch, DuplicateId

_MAGIC = b"P2K1"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIQ")
_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class GalleryItem:
    """One candidate: unique id, attribute dictionary, optional tags."""

    id: str
    dictionary: VisualDictionary
    tags: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("gallery item id must be non-empty")
        object.__setattr__(self, "tags", frozenset(self.tags))


@dataclass(frozen=True)
class GalleryIndex:
    """Immutable gallery snapshot; mutation means a full rebuild."""

    items: tuple[GalleryItem, ...]
    vectors: np.ndarray
    embedder_fingerprint: int
    _row_by_id: dict[str, int] = field(init=False, repr=False, compare=False)
    _id_rank: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.vectors.shape[0] != len(self.items):
            raise ValueError("vector rows and item count disagree")
        self.vectors.setflags(write=False)
        object.__setattr__(
            self, "_row_by_id", {item.id: row for row, item in enumerate(self.items)}
        )
        ids = [item.id for item in self.items]
        rank = np.empty(len(ids), dtype=np.int64)
        for position, row in enumerate(sorted(range(len(ids)), key=ids.__getitem__)):
            rank[row] = position
        object.__setattr__(self, "_id_rank", rank)

    @property
    def count(self) -> int:
        return len(self.items)

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def row_of(self, item_id: str) -> int | None:
        return self._row_by_id.get(item_id)

    def get(self, item_id: str) -> GalleryItem | None:
        row = self._row_by_id.get(item_id)
        return self.items[row] if row is not None else None

    def id_tiebreak_rank(self) -> np.ndarray:
        """Rank of each row's id in ascending id order (for tie-breaks)."""
        return self._id_rank


def build_index(items: list[GalleryItem], cfg: EmbedderConfig) -> GalleryIndex:
    """Embed every item's serialized dictionary and snapshot the gallery."""
    seen: set[str] = set()
    for item in items:
        if item.id in seen:
            raise DuplicateId(f"duplicate gallery id {item.id!r}")
        seen.add(item.id)
    texts = [serialize(item.dictionary.entries) for item in items]
    vectors = embed_batch(texts, cfg)
    return GalleryIndex(tuple(items), vectors, embedder_fingerprint(cfg))


def _items_payload(items: tuple[GalleryItem, ...]) -> list[dict]:
    return [
        {
            "id": item.id,
            "dictionary": [{"key": e.key, "value": e.value} for e in item.dictionary],
            "tags": sorted(item.tags),
        }
        for item in items
    ]


def _items_from_payload(payload: list[dict]) -> list[GalleryItem]:
    items = []
    for obj in payload:
        dictionary = VisualDictionary.from_pairs(
            (entry["key"], entry["value"]) for entry in obj["dictionary"]
        )
        items.append(GalleryItem(obj["id"], dictionary, frozenset(obj.get("tags", []))))
    return items


def save_index(idx: GalleryIndex, path: str | Path) -> None:
    """Write the bit-exact binary index format described in the module docstring."""
    blob = bytearray()
    blob += _HEADER.pack(_MAGIC, _VERSION, idx.dimension, idx.count, idx.embedder_fingerprint)
    blob += np.ascontiguousarray(idx.vectors, dtype="<f4").tobytes()
    json_block = json.dumps(
        _items_payload(idx.items), separators=(",", ":"), sort_keys=True
    ).encode("utf-8")
    blob += _U32.pack(len(json_block))
    blob += json_block
    blob += _U32.pack(zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    Path(path).write_bytes(bytes(blob))


def load_index(path: str | Path) -> GalleryIndex:
    """Load a saved index, validating magic, structure, and checksum."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size or data[:4] != _MAGIC:
        raise CorruptIndex(f"{path}: bad magic")
    _, version, dimension, count, fingerprint = _HEADER.unpack_from(data, 0)
    if version != _VERSION:
        raise CorruptIndex(f"{path}: unsupported format version {version}")
    vec_bytes = count * dimension * 4
    json_len_at = _HEADER.size + vec_bytes
    if len(data) < json_len_at + _U32.size:
        raise CorruptIndex(f"{path}: truncated vector block")
    (json_len,) = _U32.unpack_from(data, json_len_at)
    total = json_len_at + _U32.size + json_len + _U32.size
    if len(data) != total:
        raise CorruptIndex(f"{path}: file length {len(data)} does not match layout {total}")
    (stored_crc,) = _U32.unpack_from(data, total - _U32.size)
    if zlib.crc32(data[: total - _U32.size]) & 0xFFFFFFFF != stored_crc:
        raise CorruptIndex(f"{path}: checksum mismatch")
    vectors = np.frombuffer(
        data, dtype="<f4", count=count * dimension, offset=_HEADER.size
    ).reshape(count, dimension)
    json_start = json_len_at + _U32.size
    try:
        payload = json.loads(data[json_start : json_start + json_len].decode("utf-8"))
        items = _items_from_payload(payload)
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptIndex(f"{path}: malformed metadata block: {exc}") from exc
    if len(items) != count:
        raise CorruptIndex(f"{path}: metadata lists {len(items)} items, header says {count}")
    return GalleryIndex(tuple(items), vectors, fingerprint)


def top_k_by_cosine(idx: GalleryIndex, q: np.ndarray, k: int) -> list[tuple[str, float]]:
    """The k gallery items most cosine-similar to q.

    Exhaustive exact search over all rows; descending similarity, ties
    broken by ascending id; all items when k exceeds the gallery size.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    if q.shape[0] != idx.dimension:
        raise DimensionMismatch(f"query length {q.shape[0]} != index dimension {idx.dimension}")
    if k == 0 or idx.count == 0:
        return []
    sims = similarities(idx.vectors, q)
    order = np.lexsort((idx.id_tiebreak_rank(), -sims))
    take = order[: min(k, idx.count)]
    return [(idx.items[row].id, float(sims[row])) for row in take]
