"""Text embedding: bit-exact local feature hashing plus a remote client.

The local embedder maps a serialized dictionary string to a unit-norm
vector: lowercase, split on ':', ';', and whitespace, hash each token
with FNV-1a 64-bit, bump component (hash mod d), L2-normalize. Empty
input yields the all-zero vector, the neutral element the scorer relies
on. The remote kind forwards batches to an embedding service speaking
JSON arrays in, JSON float arrays out.

Vectors are stored as float32; dot products accumulate in float64.
"""

from __future__ import annotations

import enum
import re
import time
from dataclasses import dataclass

import numpy as np
import requests

from .errors import DimensionMismatch, MalformedRemoteResponse, RemoteUnavailable

_TOKEN_SPLIT = re.compile(r"[:;\s]+")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


class EmbedderKind(str, enum.Enum):
    LOCAL_HASHED = "local_hashed"
    REMOTE = "remote"


@dataclass(frozen=True)
class EmbedderConfig:
    """Embedder selection and parameters.

    REMOTE requires an endpoint; LOCAL_HASHED requires dimension >= 8.
    ``batch_size`` bounds remote request size and never affects outputs.
    """

    kind: EmbedderKind = EmbedderKind.LOCAL_HASHED
    dimension: int = 256
    endpoint: str | None = None
    batch_size: int = 64

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", EmbedderKind(self.kind))
        if self.dimension <= 0:
            raise ValueError("dimension must be positive")
        if self.batch_size <= 0:
            raise ValueError("batch_size must be positive")
        if self.kind is EmbedderKind.REMOTE and not self.endpoint:
            raise ValueError("remote embedder requires an endpoint")
        if self.kind is EmbedderKind.LOCAL_HASHED and self.dimension < 8:
            raise ValueError("local hashed embedder requires dimension >= 8")


def embedder_fingerprint(cfg: EmbedderConfig) -> int:
    """64-bit fingerprint of everything that determines embedding output.

    Covers kind, dimension, and endpoint; batch_size is excluded because
    chunking never changes the vectors.
    """
    return fnv1a64(f"{cfg.kind.value}|{cfg.dimension}|{cfg.endpoint or ''}".encode("utf-8"))


def _embed_local(text: str, dimension: int) -> np.ndarray:
    counts = np.zeros(dimension, dtype=np.float64)
    for token in _TOKEN_SPLIT.split(text.lower()):
        if token:
            counts[fnv1a64(token.encode("utf-8")) % dimension] += 1.0
    norm = float(np.sqrt(np.dot(counts, counts)))
    if norm == 0.0:
        return np.zeros(dimension, dtype=np.float32)
    return (counts / norm).astype(np.float32)


def _normalize_rows(rows: np.ndarray) -> np.ndarray:
    # Remote encoders may return unnormalized vectors; renormalize so the
    # unit-or-zero invariant holds. Zero rows stay zero.
    out = rows.astype(np.float32, copy=True)
    for i in range(out.shape[0]):
        norm = float(np.sqrt(np.dot(out[i].astype(np.float64), out[i].astype(np.float64))))
        if norm > 0.0:
            out[i] = (out[i].astype(np.float64) / norm).astype(np.float32)
    return out


def _post_with_retry(endpoint: str, batch: list[str], offset: int, timeout: float) -> list:
    """POST one batch, retrying transient failures.

    3 attempts with exponential backoff starting at 100 ms.
    """
    attempts = 3
    delay = 0.1
    last_error: Exception | None = None
    for attempt in range(attempts):
        if attempt > 0:
            time.sleep(delay)
            delay *= 2
        try:
            response = requests.post(endpoint, json=batch, timeout=timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = RemoteUnavailable(
                f"embedding endpoint returned HTTP {response.status_code} at batch offset {offset}"
            )
            continue
        if response.status_code != 200:
            raise RemoteUnavailable(
                f"embedding endpoint returned HTTP {response.status_code} at batch offset {offset}"
            )
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedRemoteResponse(
                f"embedding response is not JSON at batch offset {offset}", payload=response.text
            ) from exc
        return payload
    raise RemoteUnavailable(
        f"embedding endpoint {endpoint} unreachable after {attempts} attempts "
        f"at batch offset {offset}: {last_error}"
    )


def _embed_remote_batch(texts: list[str], cfg: EmbedderConfig, timeout: float) -> np.ndarray:
    vectors: list[np.ndarray] = []
    for offset in range(0, len(texts), cfg.batch_size):
        batch = texts[offset : offset + cfg.batch_size]
        payload = _post_with_retry(cfg.endpoint, batch, offset, timeout)
        if not isinstance(payload, list) or len(payload) != len(batch):
            raise MalformedRemoteResponse(
                f"embedding response has {len(payload) if isinstance(payload, list) else 'non-list'}"
                f" rows, expected {len(batch)}, at batch offset {offset}",
                payload=payload,
            )
        for i, row in enumerate(payload):
            if not isinstance(row, list) or not all(isinstance(x, (int, float)) for x in row):
                raise MalformedRemoteResponse(
                    f"embedding row {offset + i} is not a float array", payload=row
                )
            if len(row) != cfg.dimension:
                raise DimensionMismatch(
                    f"embedding row {offset + i} has length {len(row)}, expected {cfg.dimension}"
                )
        rows = np.asarray(payload, dtype=np.float32)
        vectors.extend(_normalize_rows(rows))
    return np.stack(vectors)


def embed(text: str, cfg: EmbedderConfig, timeout: float = 10.0) -> np.ndarray:
    """Embed one string to a float32 vector of cfg.dimension."""
    if cfg.kind is EmbedderKind.LOCAL_HASHED:
        return _embed_local(text, cfg.dimension)
    return _embed_remote_batch([text], cfg, timeout)[0]


def embed_batch(texts: list[str], cfg: EmbedderConfig, timeout: float = 10.0) -> np.ndarray:
    """Embed many strings to a (len(texts), cfg.dimension) float32 matrix.

    Remote calls are chunked by cfg.batch_size; failures carry the batch
    offset. Local embedding is element-wise embed().
    """
    if not texts:
        return np.zeros((0, cfg.dimension), dtype=np.float32)
    if cfg.kind is EmbedderKind.LOCAL_HASHED:
        return np.stack([_embed_local(text, cfg.dimension) for text in texts])
    return _embed_remote_batch(list(texts), cfg, timeout)


def cosine_similarity(x: np.ndarray, y: np.ndarray) -> float:
    """Dot product for unit vectors, 0.0 if either argument is all-zero.

    Accumulates in float64; result clamped to [-1, 1].
    """
    if x.shape != y.shape:
        raise DimensionMismatch(f"vector lengths differ: {x.shape} vs {y.shape}")
    if not x.any() or not y.any():
        return 0.0
    dot = float(np.dot(x.astype(np.float64), y.astype(np.float64)))
    return max(-1.0, min(1.0, dot))


def similarities(matrix: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Cosine of q against every row of a unit-or-zero row matrix.

    float64 accumulation; the zero-vector convention holds for free
    because a zero row or zero q makes the dot 0.
    """
    if matrix.shape[1] != q.shape[0]:
        raise DimensionMismatch(f"matrix width {matrix.shape[1]} != query length {q.shape[0]}")
    sims = np.einsum("ij,j->i", matrix, q.astype(np.float64), dtype=np.float64)
    return np.clip(sims, -1.0, 1.0)
