"""Command-line interface: stats, embed, run, eval, export.

Every experiment run writes a reproducibility manifest next to its records
and report, and already-recorded essays are skipped on rerun, so an
interrupted run resumes where it stopped. Records and reports are serialized
canonically (sorted keys, no timestamps), which makes replay-backed reruns
byte-identical.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from . import __version__
from .config import RunConfig, config_digest, load_run_config, run_label
from .corpus import Corpus, LABELS, Scope, Split, compute_stats, load_corpus
from .ensemble import PredictionRecord, run_ensemble
from .errors import AtcError
from .finetune import export as export_finetune
from .gateway import (
    BackendTag,
    CacheChatBackend,
    CacheEmbeddingBackend,
    Gateway,
    HashEmbeddingBackend,
    LiveChatBackend,
    LiveEmbeddingBackend,
    MockChatBackend,
    ReplayChatBackend,
    ReplayEmbeddingBackend,
    ResponseStore,
)
from .metrics import aggregate_runs, render_report
from .mocks import constant_label_responder, gold_echo_responder
from .prompting import PromptMode, build_info_block, load_class_definitions
from .selection import SelectionStrategy

MANIFEST_NAME = "manifest.json"
RECORDS_NAME = "records.jsonl"
REPORT_JSON_NAME = "report.json"
REPORT_TEXT_NAME = "report.txt"


def make_gateway(config: RunConfig, corpus: Corpus | None = None) -> Gateway:
    """Wire chat and embedding backends according to the run config."""
    backend = config.backend
    store = ResponseStore(backend.store_dir) if backend.store_dir else None

    def mock_chat() -> MockChatBackend:
        if backend.mock_mode == "gold_echo":
            if corpus is None:
                raise AtcError("gold-echo mock needs a loaded corpus")
            return MockChatBackend(responder=gold_echo_responder(corpus))
        label = {l.display_name: l for l in LABELS}.get(backend.mock_constant_label)
        if label is None:
            raise AtcError(f"unknown mock constant label {backend.mock_constant_label!r}")
        return MockChatBackend(responder=constant_label_responder(label))

    if backend.chat == "mock":
        chat = mock_chat()
    elif backend.chat == "live":
        chat = LiveChatBackend(backend.base_url, backend.api_key_env)
    elif backend.chat == "cache":
        inner = mock_chat() if backend.cache_upstream == "mock" else LiveChatBackend(
            backend.base_url, backend.api_key_env
        )
        chat = CacheChatBackend(store, inner)
    else:
        chat = ReplayChatBackend(store)

    if backend.embedding == "hash":
        embedder = HashEmbeddingBackend(dim=backend.embedding_dim)
    elif backend.embedding == "live":
        embedder = LiveEmbeddingBackend(
            backend.base_url, backend.embedding_model, backend.api_key_env
        )
    elif backend.embedding == "cache":
        if backend.embedding_upstream == "hash":
            inner_embed = HashEmbeddingBackend(dim=backend.embedding_dim)
        else:
            inner_embed = LiveEmbeddingBackend(
                backend.base_url, backend.embedding_model, backend.api_key_env
            )
        embedder = CacheEmbeddingBackend(store, inner_embed)
    else:
        embedder = ReplayEmbeddingBackend(store, backend.embedding_model)

    return Gateway(chat_backend=chat, embedding_backend=embedder)


def _print_stats(stats, scope: Scope) -> None:
    click.echo(f"Corpus statistics ({scope.value}):")
    click.echo(f"  Essays      {stats.essay_count:>8}")
    click.echo(f"  Paragraphs  {stats.paragraph_count:>8}")
    click.echo(f"  Sentences   {stats.sentence_count:>8}")
    click.echo(f"  Tokens      {stats.token_count:>8}")
    click.echo("Component statistics:")
    for label in LABELS:
        click.echo(f"  {label.display_name + 's':<14}{stats.label_counts[label]:>6}")
    click.echo(f"  {'Total':<14}{stats.component_count:>6}")


@click.group()
@click.version_option(version=__version__, prog_name="atc-icl")
def main() -> None:
    """Argument type classification experiments on persuasive essays."""


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("split_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--scope", type=click.Choice([s.value for s in Scope]), default="all")
@click.option("--json-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def stats(corpus_dir: Path, split_file: Path, scope: str, json_out: Path | None) -> None:
    """Print corpus statistics for the chosen scope."""
    corpus = load_corpus(corpus_dir, split_file)
    result = compute_stats(corpus, Scope(scope))
    _print_stats(result, Scope(scope))
    if json_out is not None:
        json_out.write_text(
            json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {json_out}")


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
def embed(config_path: Path) -> None:
    """Warm the title-embedding cache for every essay in the corpus."""
    config = load_run_config(config_path)
    corpus = load_corpus(config.corpus_dir, config.split_file)
    gateway = make_gateway(config, corpus)
    for essay in corpus.essays:
        gateway.embed(essay.title)
    tags = [tag for kind, tag in gateway.audit if kind == "embed"]
    fetched = sum(1 for tag in tags if tag is BackendTag.LIVE)
    cached = sum(1 for tag in tags if tag is BackendTag.CACHE)
    other = len(tags) - fetched - cached
    click.echo(
        f"embedded {len(tags)} titles ({fetched} live fetches, {cached} cache hits, "
        f"{other} replay/mock)"
    )


def _load_records(path: Path) -> list[PredictionRecord]:
    records = []
    if path.exists():
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                records.append(PredictionRecord.from_dict(json.loads(line)))
    return records


def _estimate_requests(essays, icl) -> tuple[int, int]:
    if icl.prompt.mode is PromptMode.ONE_BY_ONE:
        chat_calls = icl.n_rounds * sum(e.m for e in essays)
    else:
        chat_calls = icl.n_rounds * len(essays)
    return chat_calls, len(essays)


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--dry-run", is_flag=True, help="Print the request estimate and exit.")
def run(config_path: Path, dry_run: bool) -> None:
    """Run the selection + prompting + ensembling loop over the test split."""
    config = load_run_config(config_path)
    icl = config.icl
    label = run_label(icl)
    digest = config_digest(icl)
    corpus = load_corpus(config.corpus_dir, config.split_file)
    queries = sorted(corpus.test_essays(), key=lambda e: e.essay_id)
    pool = corpus.train_essays()

    if not icl.is_standard_grid():
        click.echo(
            f"note: k={icl.k}, n={icl.n_rounds} is outside the standard grid "
            f"(k in {{3,5}}, n in {{3,5}})",
            err=True,
        )

    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    records_path = out_dir / RECORDS_NAME
    existing = _load_records(records_path)
    done_ids = {record.essay_id for record in existing}
    remaining = [e for e in queries if e.essay_id not in done_ids]

    chat_calls, embed_calls = _estimate_requests(remaining, icl)
    if dry_run:
        click.echo(f"run label:       {label}")
        click.echo(f"config digest:   {digest}")
        click.echo(f"essays to run:   {len(remaining)} (of {len(queries)} test essays)")
        click.echo(f"chat requests:   ~{chat_calls} (excluding parse retries)")
        if icl.strategy is SelectionStrategy.KNN_TITLE and icl.k > 0:
            click.echo(f"embedding calls: <= {len(pool) + len(queries)} (cached after first run)")
        return

    gateway = make_gateway(config, corpus)
    definitions = (
        load_class_definitions(config.class_definitions) if config.class_definitions else None
    )
    info = build_info_block(corpus, definitions) if icl.prompt.include_info else None

    started = time.monotonic()
    with open(records_path, "a", encoding="utf-8") as handle:
        for essay in remaining:
            record = run_ensemble(essay, pool, icl, gateway, info=info)
            handle.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
            handle.flush()
            existing.append(record)
    elapsed = time.monotonic() - started

    existing.sort(key=lambda record: record.essay_id)
    report = aggregate_runs(existing, corpus, run_label=label, config_digest=digest)
    (out_dir / REPORT_JSON_NAME).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    report_text = render_report(report)
    (out_dir / REPORT_TEXT_NAME).write_text(report_text + "\n", encoding="utf-8")

    manifest = {
        "artifact_version": __version__,
        "run_label": label,
        "config_digest": digest,
        "run_seed": icl.run_seed,
        "backend_tags_used": sorted(tag.value for tag in gateway.tags_used()),
        "essay_ids": [record.essay_id for record in existing],
        "records_file": RECORDS_NAME,
        "report_file": REPORT_JSON_NAME,
        "chat_calls": sum(1 for kind, _ in gateway.audit if kind == "chat"),
        "embed_calls": sum(1 for kind, _ in gateway.audit if kind == "embed"),
        "wall_clock_seconds": round(elapsed, 3),
    }
    (out_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    click.echo(report_text)
    click.echo(f"\nwrote {records_path}, {out_dir / REPORT_JSON_NAME}, {out_dir / MANIFEST_NAME}")


@main.command("eval")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("split_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--json-out", type=click.Path(dir_okay=False, path_type=Path), default=None)
def eval_cmd(records_path: Path, corpus_dir: Path, split_file: Path, json_out: Path | None) -> None:
    """Score a records file against the corpus gold labels."""
    corpus = load_corpus(corpus_dir, split_file)
    records = _load_records(records_path)
    if not records:
        raise click.ClickException(f"no records found in {records_path}")
    report = aggregate_runs(records, corpus)
    click.echo(render_report(report))
    if json_out is not None:
        json_out.write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        click.echo(f"wrote {json_out}")


@main.command()
@click.argument("corpus_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.argument("split_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--split", type=click.Choice(["train", "test"]), required=True)
@click.option("--featxt/--no-featxt", default=False,
              help="Inject title, sentence, paragraph number, and feature text.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def export(corpus_dir: Path, split_file: Path, split: str, featxt: bool, out: Path) -> None:
    """Export fine-tuning chat records as JSONL, one per argument component."""
    corpus = load_corpus(corpus_dir, split_file)
    count = export_finetune(
        corpus, Split.TRAIN if split == "train" else Split.TEST, featxt, out
    )
    click.echo(f"wrote {count} records to {out}")


def entrypoint() -> None:
    try:
        main(standalone_mode=True)
    except AtcError as exc:  # pragma: no cover - thin wrapper
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entrypoint()
