from __future__ import annotations

import pytest

from attrieve import (
    EmbedderConfig,
    GalleryItem,
    VisualDictionary,
    build_index,
    generate_synthetic,
)


@pytest.fixture(scope="session")
def local_cfg() -> EmbedderConfig:
    return EmbedderConfig()


@pytest.fixture(scope="session")
def seeded_fixture():
    """The shared seeded benchmark fixture: 1000 items, 100 queries."""
    items, queries = generate_synthetic(42, None, 1000, 100)
    return items, queries


@pytest.fixture(scope="session")
def seeded_index(seeded_fixture, local_cfg):
    items, _ = seeded_fixture
    return build_index(items, local_cfg)


@pytest.fixture(scope="session")
def seeded_gallery(seeded_fixture):
    items, _ = seeded_fixture
    return {item.id: item for item in items}


def _item(item_id: str, pairs: list[tuple[str, str]], tags: tuple[str, ...] = ()) -> GalleryItem:
    return GalleryItem(id=item_id, dictionary=VisualDictionary.from_pairs(pairs), tags=frozenset(tags))


@pytest.fixture(scope="session")
def toy_items() -> list[GalleryItem]:
    """Six small items with known attribute overlap, used across modules."""
    return [
        _item("toy-00", [("color", "red"), ("fabric", "silk"), ("sleeve", "long")]),
        _item("toy-01", [("color", "red"), ("fabric", "wool"), ("sleeve", "short")]),
        _item("toy-02", [("color", "blue"), ("fabric", "silk"), ("sleeve", "long")]),
        _item("toy-03", [("color", "blue"), ("fabric", "linen"), ("sleeve", "short")]),
        _item("toy-04", [("color", "green"), ("fabric", "silk"), ("pattern", "floral")]),
        _item("toy-05", [("color", "red"), ("fabric", "silk"), ("sleeve", "long"), ("pattern", "solid")]),
    ]


@pytest.fixture(scope="session")
def toy_index(toy_items, local_cfg):
    return build_index(toy_items, local_cfg)
