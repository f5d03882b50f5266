"""Intent-aware relevance scoring and diversity-aware greedy reranking.

A query dictionary is split by polarity; each subset is serialized and
embedded (empty subsets embed to the zero vector, so their similarities
are 0). Per candidate i the scorer forms

    relevance = alpha * p_i + beta * o_i - (1 - alpha) * n_i

where p/o/n are cosines against the positive/open/negative subset
vectors. Reranking greedily trades normalized relevance against
embedding distance to the already-selected items; lambda = 0 reduces to
pure relevance order, lambda = 1 to pure diversity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionary import QueryDictionary, serialize, split_by_polarity
from .embedding import (
    EmbedderConfig,
    cosine_similarity,
    embed,
    embedder_fingerprint,
    similarities,
)
from .errors import EmptyPool, FingerprintMismatch, KTooLarge, UnknownCandidateId
from .gallery import GalleryIndex

DEFAULT_ALPHA = 0.7
DEFAULT_BETA = 0.3


@dataclass(frozen=True)
class IntentWeights:
    """alpha balances enforcing requested changes against suppressing
    negated ones; beta controls how strongly open anchors are preserved."""

    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not (np.isfinite(self.beta) and self.beta >= 0.0):
            raise ValueError("beta must be finite and non-negative")


@dataclass(frozen=True)
class ScoredCandidate:
    id: str
    p: float
    o: float
    n: float
    relevance: float


def relevance_score(p, o, n, w: IntentWeights):
    """alpha * p + beta * o - (1 - alpha) * n, elementwise on arrays."""
    return w.alpha * p + w.beta * o - (1.0 - w.alpha) * n


@dataclass(frozen=True)
class RerankParams:
    """lambda_ in [0, 1]; pool_size caps the relevance pool; k <= pool_size."""

    lambda_: float = 0.5
    pool_size: int = 200
    k: int = 10

    def __post_init__(self) -> None:
        if not 0.0 <= self.lambda_ <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.pool_size < 1:
            raise ValueError("pool_size must be positive")
        if not 1 <= self.k <= self.pool_size:
            raise ValueError("k must satisfy 1 <= k <= pool_size")


def query_subset_vectors(
    q: QueryDictionary, cfg: EmbedderConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Embed the serialized positive/open/negative subsets of q."""
    positive, opened, negative = split_by_polarity(q)
    return (
        embed(serialize(positive), cfg),
        embed(serialize(opened), cfg),
        embed(serialize(negative), cfg),
    )


def score_pool(
    q: QueryDictionary,
    idx: GalleryIndex,
    w: IntentWeights,
    cfg: EmbedderConfig,
    pool_size: int,
) -> list[ScoredCandidate]:
    """Score every gallery item and return the top pool_size by relevance.

    Descending relevance, ties broken by ascending id.

    Raises FingerprintMismatch when cfg differs from the config the index
    was built with.
    """
    if embedder_fingerprint(cfg) != idx.embedder_fingerprint:
        raise FingerprintMismatch(
            "query embedder config does not match the index fingerprint; rebuild the index"
        )
    if pool_size < 1:
        raise ValueError("pool_size must be positive")
    q_pos, q_open, q_neg = query_subset_vectors(q, cfg)
    p = similarities(idx.vectors, q_pos)
    o = similarities(idx.vectors, q_open)
    n = similarities(idx.vectors, q_neg)
    relevance = relevance_score(p, o, n, w)
    order = np.lexsort((idx.id_tiebreak_rank(), -relevance))
    top = order[: min(pool_size, idx.count)]
    return [
        ScoredCandidate(
            id=idx.items[row].id,
            p=float(p[row]),
            o=float(o[row]),
            n=float(n[row]),
            relevance=float(relevance[row]),
        )
        for row in top
    ]


def _minmax_normalize(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0] * len(values)
    return [(v - lo) / (hi - lo) for v in values]


def mmr_rerank(
    pool: list[ScoredCandidate], idx: GalleryIndex, params: RerankParams
) -> list[str]:
    """Greedy maximal-marginal-relevance selection over a scored pool.

    Relevance is min-max normalized over the pool (all zeros when the
    pool is flat). Pairwise distance is (1 - cosine) / 2 on the gallery
    embeddings. Each step picks the candidate maximizing

        (1 - lambda) * rhat(i) + lambda * min over selected j of d(i, j)

    with the min over an empty selection defined as 1, and ties broken by
    ascending id. Returns ids in pick order.
    """
    if not pool:
        raise EmptyPool("cannot rerank an empty pool")
    if params.k > len(pool):
        raise KTooLarge(f"k={params.k} exceeds pool size {len(pool)}")
    rows = []
    for cand in pool:
        row = idx.row_of(cand.id)
        if row is None:
            raise UnknownCandidateId(f"pool candidate {cand.id!r} is not in the gallery")
        rows.append(row)
    rhat = _minmax_normalize([c.relevance for c in pool])
    lam = params.lambda_

    # Candidates examined in ascending-id order so that a strict > keeps
    # the lowest id on objective ties.
    by_id = sorted(range(len(pool)), key=lambda i: pool[i].id)
    selected: list[int] = []
    min_dist = [1.0] * len(pool)  # min over selected; 1 is the empty-min convention
    remaining = set(range(len(pool)))
    while len(selected) < params.k:
        best_i = -1
        best_obj = -np.inf
        for i in by_id:
            if i not in remaining:
                continue
            obj = (1.0 - lam) * rhat[i] + lam * min_dist[i]
            if obj > best_obj:
                best_obj = obj
                best_i = i
        selected.append(best_i)
        remaining.discard(best_i)
        chosen_vec = idx.vectors[rows[best_i]]
        for i in remaining:
            dist = (1.0 - cosine_similarity(idx.vectors[rows[i]], chosen_vec)) / 2.0
            if dist < min_dist[i]:
                min_dist[i] = dist
    return [pool[i].id for i in selected]
