"""Retrieval metrics: Recall@K, attribute consistency, intra-list diversity."""

from __future__ import annotations

from itertools import combinations
from typing import Mapping, Sequence

from .errors import MissingRanking, UnknownCandidateId
from .evaldata import BenchmarkQuery
from .gallery import GalleryIndex


def _ranking_for(rankings: Mapping[str, Sequence[str]], query_id: str) -> Sequence[str]:
    if query_id not in rankings:
        raise MissingRanking(f"no ranking for query {query_id!r}")
    return rankings[query_id]


def recall_at_k(
    rankings: Mapping[str, Sequence[str]], targets: Mapping[str, str], k: int
) -> float:
    """Fraction of queries whose target id appears in the first k results."""
    if not targets:
        raise ValueError("recall over zero queries is undefined")
    hits = 0
    for query_id, target_id in targets.items():
        ranking = _ranking_for(rankings, query_id)
        if target_id in ranking[:k]:
            hits += 1
    return hits / len(targets)


def _satisfies(item_entries: frozenset, q: BenchmarkQuery) -> bool:
    return all(e in item_entries for e in q.positive_constraints) and not any(
        e in item_entries for e in q.negative_constraints
    )


def _entry_set(gallery: GalleryIndex, candidate_id: str) -> frozenset:
    item = gallery.get(candidate_id)
    if item is None:
        raise UnknownCandidateId(f"candidate {candidate_id!r} is not in the gallery")
    return frozenset(item.dictionary.entries)


def attribute_consistency_at_k(
    rankings: Mapping[str, Sequence[str]],
    queries: Sequence[BenchmarkQuery],
    gallery: GalleryIndex,
    k: int,
) -> float:
    """Mean fraction of top-k candidates satisfying the query constraints.

    A candidate satisfies iff its dictionary contains every positive
    constraint and no negative constraint. Lists shorter than k (possible
    only when they cover the full gallery) divide by their own length.
    """
    if not queries:
        raise ValueError("attribute consistency over zero queries is undefined")
    total = 0.0
    for q in queries:
        top = _ranking_for(rankings, q.query_id)[:k]
        if not top:
            continue
        satisfying = sum(_satisfies(_entry_set(gallery, cid), q) for cid in top)
        total += satisfying / len(top)
    return total / len(queries)


def attribute_consistency_single(
    ranking: Sequence[str], q: BenchmarkQuery, gallery: GalleryIndex, k: int
) -> float:
    """Attribute consistency of one ranking (used for per-query reporting)."""
    return attribute_consistency_at_k({q.query_id: ranking}, [q], gallery, k)


def intra_list_diversity_single(
    ranking: Sequence[str], gallery: GalleryIndex, k: int
) -> float:
    """Mean pairwise Jaccard distance among the top-k candidates of one list.

    Distance between two (key, value) sets is 1 - |A & B| / |A | B|, with
    0 when both sets are empty. Lists with fewer than two candidates have
    diversity 0.
    """
    top = ranking[:k]
    if len(top) < 2:
        return 0.0
    sets = [_entry_set(gallery, cid) for cid in top]
    total = 0.0
    pairs = 0
    for a, b in combinations(sets, 2):
        union = len(a | b)
        if union:  # both-empty pairs contribute distance 0
            total += 1.0 - len(a & b) / union
        pairs += 1
    return total / pairs


def intra_list_diversity_at_k(
    rankings: Mapping[str, Sequence[str]], gallery: GalleryIndex, k: int
) -> float:
    """Mean over queries of per-list pairwise Jaccard diversity at k."""
    if not rankings:
        raise ValueError("diversity over zero queries is undefined")
    total = 0.0
    for query_id in rankings:
        total += intra_list_diversity_single(rankings[query_id], gallery, k)
    return total / len(rankings)
