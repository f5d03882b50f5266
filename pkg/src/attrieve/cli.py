"""Command-line entry points: index build/inspect, query, eval, synth, serve."""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .benchmark import (
    DEFAULT_LIST_KS,
    DEFAULT_RECALL_KS,
    AblationToggles,
    run_benchmark,
)
from .dictionary import VisualDictionary, merge
from .editparse import parse_edit
from .embedding import EmbedderConfig, EmbedderKind
from .errors import AttrieveError
from .evaldata import write_gallery_jsonl, write_queries_jsonl, read_gallery_jsonl
from .gallery import build_index, load_index, save_index
from .ranking import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    IntentWeights,
    RerankParams,
    mmr_rerank,
    score_pool,
)
from .service import load_service_config, serve as run_service
from .synth import DEFAULT_SCHEMA, generate_synthetic


def _runtime_errors(fn):
    # Map engine/IO failures to exit code 1; click reserves 2 for usage errors.
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (AttrieveError, OSError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _embedder_options(fn):
    fn = click.option("--dimension", default=256, show_default=True, help="Embedding dimension.")(fn)
    fn = click.option(
        "--kind",
        type=click.Choice([k.value for k in EmbedderKind]),
        default=EmbedderKind.LOCAL_HASHED.value,
        show_default=True,
        help="Embedder implementation.",
    )(fn)
    fn = click.option("--endpoint", default=None, help="Remote embedding endpoint URL.")(fn)
    fn = click.option("--batch-size", default=64, show_default=True, help="Remote batch size.")(fn)
    return fn


def _embedder_config(kind: str, dimension: int, endpoint: str | None, batch_size: int) -> EmbedderConfig:
    return EmbedderConfig(EmbedderKind(kind), dimension, endpoint, batch_size)


@click.group()
def cli():
    """Composed retrieval over signed attribute dictionaries."""


@cli.group()
def index():
    """Build or inspect binary gallery indexes."""


@index.command("build")
@click.option("--gallery", required=True, type=click.Path(exists=True), help="Gallery JSONL file.")
@click.option("--out", required=True, type=click.Path(), help="Output index path.")
@_embedder_options
@_runtime_errors
def index_build(gallery, out, dimension, kind, endpoint, batch_size):
    """Embed a gallery JSONL file into a binary index."""
    cfg = _embedder_config(kind, dimension, endpoint, batch_size)
    items = read_gallery_jsonl(gallery)
    idx = build_index(items, cfg)
    save_index(idx, out)
    click.echo(f"indexed {idx.count} items at dimension {idx.dimension} -> {out}")


@index.command("inspect")
@click.argument("index_path", type=click.Path(exists=True))
@_runtime_errors
def index_inspect(index_path):
    """Print header fields and a sample of a saved index."""
    idx = load_index(index_path)
    click.echo(f"items:       {idx.count}")
    click.echo(f"dimension:   {idx.dimension}")
    click.echo(f"fingerprint: {idx.embedder_fingerprint:#018x}")
    for item in idx.items[:5]:
        click.echo(f"  {item.id}: {len(item.dictionary)} entries")
    if idx.count > 5:
        click.echo(f"  ... {idx.count - 5} more")


def _load_reference(path: str | None) -> VisualDictionary:
    if path is None:
        return VisualDictionary()
    entries = json.loads(Path(path).read_text(encoding="utf-8"))
    return VisualDictionary.from_pairs((e["key"], e["value"]) for e in entries)


@cli.command("query")
@click.option("--index", "index_path", required=True, type=click.Path(exists=True))
@click.option("--edit", default="", help="Edit instruction string.")
@click.option("--reference", default=None, type=click.Path(exists=True),
              help="JSON file with a [{key, value}, ...] reference dictionary.")
@click.option("--reference-id", default=None, help="Use a gallery item's dictionary as reference.")
@click.option("--alpha", default=DEFAULT_ALPHA, show_default=True)
@click.option("--beta", default=DEFAULT_BETA, show_default=True)
@click.option("--lambda", "lambda_", default=0.5, show_default=True, help="Diversity weight.")
@click.option("--k", default=10, show_default=True, help="Results to return.")
@click.option("--pool", default=200, show_default=True, help="Relevance pool size.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table",
              show_default=True)
@_embedder_options
@_runtime_errors
def query_cmd(index_path, edit, reference, reference_id, alpha, beta, lambda_, k, pool, fmt,
              dimension, kind, endpoint, batch_size):
    """Rank gallery items for a reference dictionary plus an edit string."""
    if reference is not None and reference_id is not None:
        raise click.UsageError("--reference and --reference-id are mutually exclusive")
    idx = load_index(index_path)
    cfg = _embedder_config(kind, dimension, endpoint, batch_size)
    if reference_id is not None:
        item = idx.get(reference_id)
        if item is None:
            raise click.ClickException(f"no gallery item {reference_id!r}")
        ref = item.dictionary
    else:
        ref = _load_reference(reference)
    program = parse_edit(edit)
    merged = merge(ref, program.updates)
    weights = IntentWeights(alpha, beta)
    candidates = score_pool(merged, idx, weights, cfg, pool)
    if candidates:
        params = RerankParams(lambda_, pool, min(k, len(candidates)))
        ids = mmr_rerank(candidates, idx, params)
    else:
        ids = []
    by_id = {c.id: c for c in candidates}
    if fmt == "json":
        payload = {
            "results": [
                {
                    "id": cid,
                    "p": by_id[cid].p,
                    "o": by_id[cid].o,
                    "n": by_id[cid].n,
                    "relevance": by_id[cid].relevance,
                    "rank": rank,
                }
                for rank, cid in enumerate(ids, start=1)
            ],
            "parsed_edit": [
                {"key": s.entry.key, "value": s.entry.value, "polarity": int(s.polarity)}
                for s in program.updates
            ],
            "merged_query": [
                {"key": s.entry.key, "value": s.entry.value, "polarity": int(s.polarity)}
                for s in merged
            ],
        }
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
        return
    click.echo(f"{'rank':>4}  {'id':<16}{'p':>10}{'o':>10}{'n':>10}{'R':>10}")
    for rank, cid in enumerate(ids, start=1):
        c = by_id[cid]
        click.echo(f"{rank:>4}  {cid:<16}{c.p:>10.4f}{c.o:>10.4f}{c.n:>10.4f}{c.relevance:>10.4f}")


def _parse_ks(raw: str, flag: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(part) for part in raw.split(",") if part.strip())
    except ValueError as exc:
        raise click.UsageError(f"{flag} expects comma-separated integers") from exc
    if not ks or any(k < 1 for k in ks):
        raise click.UsageError(f"{flag} expects positive integers")
    return ks


@cli.command("eval")
@click.option("--gallery", required=True, type=click.Path(exists=True))
@click.option("--queries", required=True, type=click.Path(exists=True))
@click.option("--alpha", default=DEFAULT_ALPHA, show_default=True)
@click.option("--beta", default=DEFAULT_BETA, show_default=True)
@click.option("--lambda", "lambda_", default=0.5, show_default=True)
@click.option("--k", default=50, show_default=True, help="Rerank depth.")
@click.option("--pool", default=200, show_default=True)
@click.option("--no-neg", is_flag=True, help="Drop negative constraints before embedding.")
@click.option("--no-open", is_flag=True, help="Drop open anchors before embedding.")
@click.option("--no-mmr", is_flag=True, help="Skip reranking; rank by relevance.")
@click.option("--recall-ks", default=",".join(map(str, DEFAULT_RECALL_KS)), show_default=True)
@click.option("--list-ks", default=",".join(map(str, DEFAULT_LIST_KS)), show_default=True)
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table",
              show_default=True)
@click.option("--out", default=None, type=click.Path(), help="Also write the JSON report here.")
@_embedder_options
@_runtime_errors
def eval_cmd(gallery, queries, alpha, beta, lambda_, k, pool, no_neg, no_open, no_mmr,
             recall_ks, list_ks, fmt, out, dimension, kind, endpoint, batch_size):
    """Run the benchmark over gallery and query files and report metrics."""
    report = run_benchmark(
        gallery,
        queries,
        IntentWeights(alpha, beta),
        RerankParams(lambda_, pool, k),
        AblationToggles(use_neg=not no_neg, use_open=not no_open, use_mmr=not no_mmr),
        cfg=_embedder_config(kind, dimension, endpoint, batch_size),
        recall_ks=_parse_ks(recall_ks, "--recall-ks"),
        list_ks=_parse_ks(list_ks, "--list-ks"),
    )
    if out is not None:
        Path(out).write_text(report.to_json() + "\n", encoding="utf-8")
    click.echo(report.to_json() if fmt == "json" else report.to_table())
    if report.failures:
        click.echo(f"{len(report.failures)} queries failed", err=True)
        sys.exit(1)


@cli.command("synth")
@click.option("--seed", default=42, show_default=True)
@click.option("--items", "n_items", default=1000, show_default=True)
@click.option("--queries", "n_queries", default=100, show_default=True)
@click.option("--schema", default=None, type=click.Path(exists=True),
              help="JSON file mapping key -> [values]; defaults to the built-in schema.")
@click.option("--gallery-out", required=True, type=click.Path())
@click.option("--queries-out", required=True, type=click.Path())
@_runtime_errors
def synth_cmd(seed, n_items, n_queries, schema, gallery_out, queries_out):
    """Generate a seeded synthetic gallery and query set."""
    schema_map = DEFAULT_SCHEMA
    if schema is not None:
        raw = json.loads(Path(schema).read_text(encoding="utf-8"))
        schema_map = {key: tuple(values) for key, values in raw.items()}
    items, bench_queries = generate_synthetic(seed, schema_map, n_items, n_queries)
    write_gallery_jsonl(items, gallery_out)
    write_queries_jsonl(bench_queries, queries_out)
    click.echo(f"wrote {len(items)} items -> {gallery_out}")
    click.echo(f"wrote {len(bench_queries)} queries -> {queries_out}")


@cli.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True),
              help="Flat JSON config file.")
@click.option("--index", "index_path", default=None, type=click.Path(),
              help="Index path (overrides config and P2K_INDEX).")
@click.option("--listen", default=None, help="host:port (overrides config and P2K_LISTEN).")
@_runtime_errors
def serve_cmd(config_path, index_path, listen):
    """Run the HTTP query service."""
    import dataclasses

    from .service import ServiceConfig

    try:
        config = load_service_config(config_path)
    except ValueError:
        # No index in config or environment; the flag may still supply one.
        if index_path is None:
            raise
        config = ServiceConfig(index_path=index_path)
    if index_path is not None:
        config = dataclasses.replace(config, index_path=index_path)
    if listen is not None:
        config = dataclasses.replace(config, listen=listen)
    run_service(config)


def main():
    cli()


if __name__ == "__main__":
    main()
