"""HTTP query service: health, query, candidate lookup, embed passthrough.

All routes speak JSON. Responses are deterministic: the service keeps an
immutable index snapshot and every request is stateless, so identical
bodies yield identical bytes. The parsed edit and the merged query are
echoed in every /query response so clients can show exactly what the
pipeline executed.
"""

from __future__ import annotations

import asyncio
import json
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .dictionary import SignedEntry, VisualDictionary, merge
from .editparse import parse_edit
from .embedding import EmbedderConfig, EmbedderKind, embed_batch, embedder_fingerprint
from .errors import AttrieveError, FingerprintMismatch, UnparsableClause
from .evaldata import gallery_item_to_json
from .gallery import GalleryIndex, load_index
from .ranking import IntentWeights, RerankParams, mmr_rerank, score_pool

ENV_INDEX = "P2K_INDEX"
ENV_LISTEN = "P2K_LISTEN"
ENV_EMBED_ENDPOINT = "P2K_EMBED_ENDPOINT"


@dataclass(frozen=True)
class ServiceConfig:
    index_path: str
    listen: str = "127.0.0.1:8765"
    embedder: EmbedderConfig = EmbedderConfig()
    weights: IntentWeights = IntentWeights()
    rerank: RerankParams = RerankParams()
    decompose_endpoint: str | None = None
    timeout_s: float = 10.0
    max_concurrent: int = 64

    def __post_init__(self) -> None:
        if self.timeout_s <= 0 or self.max_concurrent <= 0:
            raise ValueError("timeout_s and max_concurrent must be positive")

    @property
    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen.rpartition(":")
        return host or "127.0.0.1", int(port)


def load_service_config(path: str | Path | None = None) -> ServiceConfig:
    """Build a ServiceConfig from a flat JSON file plus environment overrides.

    P2K_INDEX and P2K_LISTEN override the index path and listen address;
    P2K_EMBED_ENDPOINT overrides the embedding endpoint and switches the
    embedder to the remote kind.
    """
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    index_path = os.environ.get(ENV_INDEX, raw.get("index", ""))
    listen = os.environ.get(ENV_LISTEN, raw.get("listen", "127.0.0.1:8765"))
    endpoint = os.environ.get(ENV_EMBED_ENDPOINT, raw.get("embed_endpoint"))
    kind = raw.get("embedder_kind", EmbedderKind.LOCAL_HASHED.value)
    if ENV_EMBED_ENDPOINT in os.environ:
        kind = EmbedderKind.REMOTE.value
    if not index_path:
        raise ValueError(f"no index path: set {ENV_INDEX} or the 'index' config key")
    embedder = EmbedderConfig(
        kind=EmbedderKind(kind),
        dimension=int(raw.get("dimension", 256)),
        endpoint=endpoint,
        batch_size=int(raw.get("batch_size", 64)),
    )
    return ServiceConfig(
        index_path=index_path,
        listen=listen,
        embedder=embedder,
        weights=IntentWeights(float(raw.get("alpha", 0.7)), float(raw.get("beta", 0.3))),
        rerank=RerankParams(
            float(raw.get("lambda", 0.5)), int(raw.get("pool", 200)), int(raw.get("k", 10))
        ),
        decompose_endpoint=raw.get("decompose_endpoint"),
        timeout_s=float(raw.get("timeout_s", 10.0)),
        max_concurrent=int(raw.get("max_concurrent", 64)),
    )


class IndexHolder:
    """Swap-on-complete snapshot holder; None only during a swap."""

    def __init__(self, index: GalleryIndex | None = None):
        self._index = index

    def get(self) -> GalleryIndex | None:
        return self._index

    def swap(self, index: GalleryIndex | None) -> None:
        self._index = index


class EntryModel(BaseModel):
    key: str
    value: str


class QueryRequest(BaseModel):
    model_config = {"populate_by_name": True}

    reference: list[EntryModel] | None = None
    reference_id: str | None = None
    edit: str = ""
    alpha: float | None = None
    beta: float | None = None
    lambda_: float | None = Field(default=None, alias="lambda")
    k: int | None = None
    pool: int | None = None


def _signed_json(entries: tuple[SignedEntry, ...] | list[SignedEntry]) -> list[dict]:
    return [
        {"key": s.entry.key, "value": s.entry.value, "polarity": int(s.polarity)}
        for s in entries
    ]


def _error_response(status: int, code: str, message: str, span: tuple[int, int] | None = None):
    body: dict = {"error": {"code": code, "message": message}}
    if span is not None:
        body["error"]["span"] = list(span)
    return JSONResponse(status_code=status, content=body)


def create_app(config: ServiceConfig) -> FastAPI:
    """Load the index, validate its fingerprint, and build the app."""
    index = load_index(config.index_path)
    expected = embedder_fingerprint(config.embedder)
    if index.embedder_fingerprint != expected:
        raise FingerprintMismatch(
            f"index {config.index_path} was built with a different embedder config"
        )
    app = FastAPI(title="attrieve", docs_url=None, redoc_url=None)
    app.state.holder = IndexHolder(index)
    app.state.config = config
    app.state.semaphore = asyncio.Semaphore(config.max_concurrent)

    @app.middleware("http")
    async def _bounded_concurrency(request: Request, call_next):
        async with app.state.semaphore:
            return await call_next(request)

    @app.exception_handler(AttrieveError)
    async def _attrieve_error(_request: Request, exc: AttrieveError):
        span = exc.span if isinstance(exc, UnparsableClause) else None
        return _error_response(400, exc.code, str(exc), span)

    @app.exception_handler(ValueError)
    async def _value_error(_request: Request, exc: ValueError):
        return _error_response(400, "InvalidParameter", str(exc))

    class _SwapInProgress(Exception):
        pass

    @app.exception_handler(_SwapInProgress)
    async def _swap_in_progress(_request: Request, _exc: _SwapInProgress):
        return _error_response(503, "IndexSwap", "index swap in progress; retry shortly")

    def _snapshot() -> GalleryIndex:
        snapshot = app.state.holder.get()
        if snapshot is None:
            raise _SwapInProgress()
        return snapshot

    @app.get("/health")
    def health():
        snapshot = _snapshot()
        return {
            "status": "ok",
            "gallery_size": snapshot.count,
            "dimension": snapshot.dimension,
        }

    @app.post("/query")
    def query(body: QueryRequest):
        snapshot = _snapshot()
        if body.reference is not None and body.reference_id is not None:
            return _error_response(
                400, "InvalidParameter", "provide either reference or reference_id, not both"
            )
        if body.reference_id is not None:
            item = snapshot.get(body.reference_id)
            if item is None:
                return _error_response(
                    404, "UnknownCandidateId", f"no gallery item {body.reference_id!r}"
                )
            reference = item.dictionary
        elif body.reference is not None:
            reference = VisualDictionary.from_pairs((e.key, e.value) for e in body.reference)
        else:
            reference = VisualDictionary()
        weights = IntentWeights(
            config.weights.alpha if body.alpha is None else body.alpha,
            config.weights.beta if body.beta is None else body.beta,
        )
        lambda_ = config.rerank.lambda_ if body.lambda_ is None else body.lambda_
        k = config.rerank.k if body.k is None else body.k
        pool_size = config.rerank.pool_size if body.pool is None else body.pool
        program = parse_edit(body.edit)
        merged = merge(reference, program.updates)
        pool = score_pool(merged, snapshot, weights, config.embedder, pool_size)
        if pool:
            params = RerankParams(lambda_, pool_size, min(k, len(pool)))
            ids = mmr_rerank(pool, snapshot, params)
        else:
            ids = []
        by_id = {c.id: c for c in pool}
        results = [
            {
                "id": cid,
                "p": by_id[cid].p,
                "o": by_id[cid].o,
                "n": by_id[cid].n,
                "relevance": by_id[cid].relevance,
                "rank": rank,
            }
            for rank, cid in enumerate(ids, start=1)
        ]
        return {
            "results": results,
            "parsed_edit": _signed_json(program.updates),
            "merged_query": _signed_json(tuple(merged)),
        }

    @app.get("/candidates/{item_id}")
    def candidate(item_id: str):
        snapshot = _snapshot()
        item = snapshot.get(item_id)
        if item is None:
            return _error_response(404, "UnknownCandidateId", f"no gallery item {item_id!r}")
        return gallery_item_to_json(item)

    @app.post("/embed")
    def embed_passthrough(texts: list[str]):
        vectors = embed_batch(texts, config.embedder, timeout=config.timeout_s)
        return [[float(x) for x in vec] for vec in vectors]

    return app


def serve(config: ServiceConfig) -> None:
    """Run the service until interrupted."""
    import uvicorn

    app = create_app(config)
    host, port = config.host_port
    uvicorn.run(app, host=host, port=port, log_level="info")
