"""Benchmark runner: parse -> merge -> score -> rerank per query, metrics report.

Ablation toggles mirror the component columns of the evaluation table:
use_pos is always on; use_neg / use_open empty the corresponding polarity
subset before embedding; use_mmr switches reranking on. Per-query
failures are collected, never fatal; callers decide the exit status.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .dictionary import Polarity, QueryDictionary, merge
from .editparse import parse_edit
from .embedding import EmbedderConfig
from .errors import AttrieveError, UnknownCandidateId
from .evaldata import BenchmarkQuery, read_gallery_jsonl, read_queries_jsonl
from .gallery import GalleryIndex, build_index
from .metrics import (
    attribute_consistency_at_k,
    attribute_consistency_single,
    intra_list_diversity_at_k,
    intra_list_diversity_single,
    recall_at_k,
)
from .ranking import IntentWeights, RerankParams, mmr_rerank, score_pool

DEFAULT_RECALL_KS = (1, 5, 10, 50)
DEFAULT_LIST_KS = (10, 50)


@dataclass(frozen=True)
class AblationToggles:
    """Component switches; use_pos stays on in every configuration."""

    use_pos: bool = True
    use_neg: bool = True
    use_open: bool = True
    use_mmr: bool = True

    def __post_init__(self) -> None:
        if not self.use_pos:
            raise ValueError("use_pos cannot be disabled")


def filter_polarities(q: QueryDictionary, toggles: AblationToggles) -> QueryDictionary:
    """Drop disabled polarity groups; enabled groups pass through unchanged."""
    kept = []
    for signed in q:
        if signed.polarity is Polarity.NEGATIVE and not toggles.use_neg:
            continue
        if signed.polarity is Polarity.OPEN and not toggles.use_open:
            continue
        kept.append(signed)
    return QueryDictionary(tuple(kept))


@dataclass(frozen=True)
class PerQueryRow:
    query_id: str
    target_rank: int | None
    ac: float
    ild: float


@dataclass
class MetricsReport:
    """Aggregated metrics (stored in [0, 1]; rendered x100, 2 decimals)."""

    recall_at: dict[int, float]
    ac_at: dict[int, float]
    ild_at: dict[int, float]
    per_query_rows: list[PerQueryRow]
    config_echo: dict
    failures: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "config": self.config_echo,
            "recall_at": {str(k): round(v * 100.0, 2) for k, v in self.recall_at.items()},
            "ac_at": {str(k): round(v * 100.0, 2) for k, v in self.ac_at.items()},
            "ild_at": {str(k): round(v * 100.0, 2) for k, v in self.ild_at.items()},
            "query_count": len(self.per_query_rows) + len(self.failures),
            "failure_count": len(self.failures),
            "per_query": [
                {
                    "query_id": row.query_id,
                    "target_rank": row.target_rank,
                    "ac": row.ac,
                    "ild": row.ild,
                }
                for row in self.per_query_rows
            ],
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    def to_table(self) -> str:
        lines = [f"{'metric':<10}{'K':>6}{'value':>10}"]
        for name, series in (
            ("recall", self.recall_at),
            ("ac", self.ac_at),
            ("ild", self.ild_at),
        ):
            for k in sorted(series):
                lines.append(f"{name:<10}{k:>6}{series[k] * 100.0:>10.2f}")
        lines.append(
            f"queries: {len(self.per_query_rows) + len(self.failures)} "
            f"(failed: {len(self.failures)})"
        )
        return "\n".join(lines)


def rank_queries(
    idx: GalleryIndex,
    queries: list[BenchmarkQuery],
    weights: IntentWeights,
    rerank: RerankParams,
    toggles: AblationToggles,
    cfg: EmbedderConfig,
) -> tuple[dict[str, list[str]], list[dict]]:
    """Produce a ranking per query; collect per-query failures."""
    rankings: dict[str, list[str]] = {}
    failures: list[dict] = []
    for q in queries:
        try:
            if idx.get(q.target_id) is None:
                raise UnknownCandidateId(f"target {q.target_id!r} is not in the gallery")
            program = parse_edit(q.edit)
            merged = merge(q.reference, program.updates)
            filtered = filter_polarities(merged, toggles)
            pool = score_pool(filtered, idx, weights, cfg, rerank.pool_size)
            if toggles.use_mmr and pool:
                k = min(rerank.k, len(pool))
                params = RerankParams(rerank.lambda_, rerank.pool_size, k)
                rankings[q.query_id] = mmr_rerank(pool, idx, params)
            else:
                rankings[q.query_id] = [c.id for c in pool[: rerank.k]]
        except AttrieveError as exc:
            failures.append({"query_id": q.query_id, "code": exc.code, "message": str(exc)})
    return rankings, failures


def run_benchmark(
    gallery_path: str | Path,
    queries_path: str | Path,
    weights: IntentWeights,
    rerank: RerankParams,
    toggles: AblationToggles,
    cfg: EmbedderConfig | None = None,
    recall_ks: tuple[int, ...] = DEFAULT_RECALL_KS,
    list_ks: tuple[int, ...] = DEFAULT_LIST_KS,
) -> MetricsReport:
    """Run the full pipeline over benchmark files and aggregate metrics.

    Per-query rows carry AC and ILD at the largest K in list_ks. The
    rerank depth k must cover the requested metric depths (or the whole
    gallery, whichever is smaller).
    """
    cfg = cfg or EmbedderConfig()
    items = read_gallery_jsonl(gallery_path)
    idx = build_index(items, cfg)
    queries = read_queries_jsonl(queries_path)
    max_k = max((*recall_ks, *list_ks))
    if rerank.k < min(max_k, idx.count):
        raise ValueError(
            f"rerank k={rerank.k} is shallower than the deepest requested metric K={max_k}"
        )
    rankings, failures = rank_queries(idx, queries, weights, rerank, toggles, cfg)
    succeeded = [q for q in queries if q.query_id in rankings]
    report_k = max(list_ks)
    rows = []
    for q in succeeded:
        ranking = rankings[q.query_id]
        rank = ranking.index(q.target_id) + 1 if q.target_id in ranking else None
        rows.append(
            PerQueryRow(
                query_id=q.query_id,
                target_rank=rank,
                ac=attribute_consistency_single(ranking, q, idx, report_k),
                ild=intra_list_diversity_single(ranking, idx, report_k),
            )
        )
    recall_map: dict[int, float] = {}
    ac_map: dict[int, float] = {}
    ild_map: dict[int, float] = {}
    if succeeded:
        targets = {q.query_id: q.target_id for q in succeeded}
        for k in recall_ks:
            recall_map[k] = recall_at_k(rankings, targets, k)
        for k in list_ks:
            ac_map[k] = attribute_consistency_at_k(rankings, succeeded, idx, k)
            ild_map[k] = intra_list_diversity_at_k(rankings, idx, k)
    config_echo = {
        "alpha": weights.alpha,
        "beta": weights.beta,
        "lambda": rerank.lambda_,
        "pool_size": rerank.pool_size,
        "k": rerank.k,
        "use_pos": toggles.use_pos,
        "use_neg": toggles.use_neg,
        "use_open": toggles.use_open,
        "use_mmr": toggles.use_mmr,
        "embedder": {"kind": cfg.kind.value, "dimension": cfg.dimension},
        "recall_ks": list(recall_ks),
        "list_ks": list(list_ks),
    }
    return MetricsReport(recall_map, ac_map, ild_map, rows, config_echo, failures)
