"""Seed-deterministic synthetic benchmark generator.

Does: builds a gallery of items over a key -> values schema, then builds
queries that plant a known target: each query copies a target item's
dictionary, displaces the values of one or two keys to form the
reference, and asks for the target's actual values back via a
structured-form edit. The displaced values become negative constraints,
so every target satisfies its own constraints by construction.

Determinism contract: all randomness flows through one splitmix64
stream seeded by ``seed``, consumed in a fixed documented order (items
first, then queries); equal (seed, schema, n_items, n_queries) yields
byte-identical output files.
"""

from __future__ import annotations

from .dictionary import AttributeEntry, VisualDictionary
from .errors import SchemaTooSmall
from .evaldata import BenchmarkQuery
from .gallery import GalleryItem

_MASK64 = 0xFFFFFFFFFFFFFFFF

# 6-key x 4-value default schema. The 30 token strings occupy 30 distinct
# FNV-1a buckets at dimension 256, so hashed embeddings of schema
# dictionaries never self-collide under the default embedder config.
DEFAULT_SCHEMA: dict[str, tuple[str, ...]] = {
    "color": ("red", "blue", "green", "black"),
    "fabric": ("cotton", "silk", "denim", "wool"),
    "fit": ("slim", "loose", "regular", "oversized"),
    "neckline": ("crew", "vneck", "collar", "boat"),
    "pattern": ("striped", "floral", "plain", "dotted"),
    "sleeve": ("long", "short", "sleeveless", "rolled"),
}


class SplitMix64:
    """splitmix64 PRNG; the sole randomness source for generation."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform-ish draw in [0, n) via modulo reduction."""
        assert n > 0
        return self.next_u64() % n


def _validated_schema(schema: dict[str, tuple[str, ...]]) -> list[tuple[str, list[str]]]:
    if not schema:
        raise SchemaTooSmall("schema has no keys")
    ordered = []
    for key in sorted(schema):
        values = sorted(set(schema[key]))
        if len(values) < 2:
            raise SchemaTooSmall(f"key {key!r} offers {len(values)} value(s); need at least 2")
        ordered.append((key, values))
    return ordered


def generate_synthetic(
    seed: int,
    schema: dict[str, tuple[str, ...]] | None = None,
    n_items: int = 1000,
    n_queries: int = 100,
) -> tuple[list[GalleryItem], list[BenchmarkQuery]]:
    """Generate a planted-target benchmark.

    Draw order (one splitmix64 stream): for each item, one value index
    per key in sorted-key order; then for each query, the target item
    index, the mutated-key count (1 or 2), the mutated key index (plus an
    offset for the second key), and one displaced-value index per mutated
    key in sorted-key order.

    Each query's positive constraints are the target's actual values on
    the mutated keys; the negative constraints are the displaced values
    the reference carries instead; the edit lists positives then
    negatives in structured form. Targets therefore satisfy all of their
    own constraints.
    """
    if n_items < 0 or n_queries < 0:
        raise ValueError("n_items and n_queries must be non-negative")
    if n_queries > 0 and n_items == 0:
        raise ValueError("cannot generate queries over an empty gallery")
    ordered_schema = _validated_schema(schema if schema is not None else DEFAULT_SCHEMA)
    n_keys = len(ordered_schema)
    rng = SplitMix64(seed)

    items: list[GalleryItem] = []
    value_choice: list[list[int]] = []
    for i in range(n_items):
        picks = [rng.below(len(values)) for _, values in ordered_schema]
        value_choice.append(picks)
        entries = tuple(
            AttributeEntry(key, values[pick])
            for (key, values), pick in zip(ordered_schema, picks)
        )
        items.append(GalleryItem(f"item-{i:05d}", VisualDictionary(entries)))

    queries: list[BenchmarkQuery] = []
    for j in range(n_queries):
        target_row = rng.below(n_items)
        target = items[target_row]
        n_mutated = min(1 + rng.below(2), n_keys)
        first = rng.below(n_keys)
        mutated = {first}
        if n_mutated == 2:
            mutated.add((first + 1 + rng.below(n_keys - 1)) % n_keys)
        positives: list[AttributeEntry] = []
        negatives: list[AttributeEntry] = []
        displaced: dict[str, str] = {}
        for key_index in sorted(mutated):
            key, values = ordered_schema[key_index]
            target_pick = value_choice[target_row][key_index]
            shifted = rng.below(len(values) - 1)
            if shifted >= target_pick:
                shifted += 1
            positives.append(AttributeEntry(key, values[target_pick]))
            negatives.append(AttributeEntry(key, values[shifted]))
            displaced[key] = values[shifted]
        reference_entries = tuple(
            AttributeEntry(e.key, displaced.get(e.key, e.value)) for e in target.dictionary
        )
        edit = "; ".join(
            [f"+{e.key}:{e.value}" for e in positives]
            + [f"-{e.key}:{e.value}" for e in negatives]
        )
        queries.append(
            BenchmarkQuery(
                query_id=f"query-{j:04d}",
                reference=VisualDictionary(reference_entries),
                edit=edit,
                target_id=target.id,
                positive_constraints=tuple(positives),
                negative_constraints=tuple(negatives),
            )
        )
    return items, queries
