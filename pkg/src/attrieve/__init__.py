"""Composed retrieval over signed attribute dictionaries.

Queries are (reference dictionary, edit instruction) pairs. The edit is
parsed into signed updates, merged with the reference into a polarity-
annotated query dictionary, embedded per polarity subset, scored against
a precomputed gallery index, and optionally reranked for diversity.
"""

from .benchmark import (
    AblationToggles,
    MetricsReport,
    PerQueryRow,
    filter_polarities,
    run_benchmark,
)
from .dictionary import (
    AttributeEntry,
    Polarity,
    QueryDictionary,
    SignedEntry,
    VisualDictionary,
    canonicalize,
    merge,
    serialize,
    split_by_polarity,
)
from .editparse import EditProgram, decompose_remote, parse_edit, render_structured
from .embedding import (
    EmbedderConfig,
    EmbedderKind,
    cosine_similarity,
    embed,
    embed_batch,
    embedder_fingerprint,
    fnv1a64,
)
from .errors import (
    AttrieveError,
    ContradictoryUpdates,
    CorruptIndex,
    DimensionMismatch,
    DuplicateId,
    EmptyField,
    EmptyPool,
    FingerprintMismatch,
    KTooLarge,
    MalformedRemoteResponse,
    MissingRanking,
    RemoteUnavailable,
    ReservedCharacter,
    SchemaTooSmall,
    UnknownCandidateId,
    UnparsableClause,
)
from .evaldata import (
    BenchmarkQuery,
    read_gallery_jsonl,
    read_queries_jsonl,
    write_gallery_jsonl,
    write_queries_jsonl,
)
from .gallery import GalleryIndex, GalleryItem, build_index, load_index, save_index, top_k_by_cosine
from .metrics import (
    attribute_consistency_at_k,
    attribute_consistency_single,
    intra_list_diversity_at_k,
    intra_list_diversity_single,
    recall_at_k,
)
from .ranking import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    IntentWeights,
    RerankParams,
    ScoredCandidate,
    mmr_rerank,
    relevance_score,
    score_pool,
)
from .synth import DEFAULT_SCHEMA, SplitMix64, generate_synthetic

__version__ = "0.1.0"
