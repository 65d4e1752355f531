"""Command line interface: ingest, analyze, targets, report, bench, serve."""

from __future__ import annotations

import json
from datetime import date
from pathlib import Path

import click

from .bench import BenchmarkConfig, run_benchmark
from .corpus import load_corpus, temporal_split, write_jsonl
from .embeddings import HashingEncoder
from .generators import MockGenerator
from .graph import build_knn_graph
from .pack import DiscoveryCue, RetrievalBudget
from .pipeline import analyze_corpus, derive_targets
from .report import render_benchmark_report, render_snapshot_report
from .snapshot import AnalysisConfig, SnapshotStore
from .targets import derive_cluster_pairs, extract_gap_regions, rank_top_gaps


def _parse_scales(text: str) -> tuple[int, ...]:
    try:
        scales = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise click.BadParameter(f"scales must be comma-separated integers: {text}") from exc
    if not scales:
        raise click.BadParameter("at least one scale required")
    return scales


@click.group()
def main() -> None:
    """Corpus frontier mapping and evidence-grounded hypothesis generation."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def ingest(input_path: str, out_path: str) -> None:
    """Validate and normalize a JSONL corpus."""
    corpus, report = load_corpus(input_path)
    write_jsonl(corpus, out_path)
    click.echo(f"accepted {report.accepted} records, rejected {len(report.rejected)}")
    for index, reason in report.rejected:
        click.echo(f"  line {index + 1}: {reason}", err=True)


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--graph-k", default=21, show_default=True)
@click.option("--scales", default="10,20,30,40,50", show_default=True)
@click.option("--pca-components", default=102, show_default=True)
@click.option(
    "--cluster-mode",
    default="leiden",
    show_default=True,
    type=click.Choice(["leiden", "kmeans", "graph_community"]),
)
@click.option("--resolution", default=1.0, show_default=True)
@click.option("--kmeans-k", default=None, type=int)
@click.option("--seed", default=42, show_default=True)
@click.option("--gap-quantile", default=0.95, show_default=True)
@click.option("--min-gap-size", default=3, show_default=True)
def analyze(
    input_path: str,
    store_path: str,
    graph_k: int,
    scales: str,
    pca_components: int,
    cluster_mode: str,
    resolution: float,
    kmeans_k: int,
    seed: int,
    gap_quantile: float,
    min_gap_size: int,
) -> None:
    """Run the full analysis and publish an immutable snapshot."""
    corpus, report = load_corpus(input_path)
    if report.rejected:
        click.echo(f"warning: {len(report.rejected)} records rejected during load", err=True)
    config = AnalysisConfig(
        graph_k=graph_k,
        scales=_parse_scales(scales),
        pca_components=pca_components,
        cluster_mode=cluster_mode,
        resolution=resolution,
        kmeans_k=kmeans_k,
        seed=seed,
        gap_quantile=gap_quantile,
        min_gap_size=min_gap_size,
    )
    snapshot = analyze_corpus(corpus, config)
    store = SnapshotStore(store_path)
    snapshot_id = store.publish_snapshot(snapshot)
    store.close()
    click.echo(snapshot_id)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--snapshot", "snapshot_id", required=True)
@click.option("--gap-quantile", default=0.95, show_default=True)
@click.option("--min-gap-size", default=3, show_default=True)
@click.option("--gap-targets", default=20, show_default=True)
@click.option("--pair-targets", default=10, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path())
def targets(
    store_path: str,
    snapshot_id: str,
    gap_quantile: float,
    min_gap_size: int,
    gap_targets: int,
    pair_targets: int,
    out_path: str,
) -> None:
    """Derive gap and cluster-pair targets from a published snapshot."""
    store = SnapshotStore(store_path)
    snap = store.get_snapshot(snapshot_id)
    store.close()
    config = snap.config
    if gap_quantile != config.gap_quantile or min_gap_size != config.min_gap_size:
        k = min(config.graph_k, len(snap.corpus) - 1)
        graph = build_knn_graph(snap.analysis_vectors, k=k, ids=list(snap.ids))
        regions = extract_gap_regions(
            snap.gap_scores,
            graph,
            tau=gap_quantile,
            min_size=min_gap_size,
            assignment=snap.assignment,
        )
        ranked = rank_top_gaps(regions)
        specs = [
            {"kind": "gap", "region_id": r.region_id} for r in ranked[:gap_targets]
        ] + [t.to_payload() for t in derive_cluster_pairs(ranked, snap.assignment, pair_targets)]
    else:
        specs = [t.to_payload() for t in derive_targets(snap, gap_targets, pair_targets)]
    lines = [json.dumps(spec) for spec in specs]
    if out_path:
        Path(out_path).write_text("\n".join(lines) + "\n")
        click.echo(f"wrote {len(specs)} targets to {out_path}")
    else:
        for line in lines:
            click.echo(line)


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path(exists=True))
@click.option("--snapshot", "snapshot_id", required=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(store_path: str, snapshot_id: str, out_dir: str) -> None:
    """Render snapshot figures and tables into a directory."""
    store = SnapshotStore(store_path)
    snap = store.get_snapshot(snapshot_id)
    store.close()
    for path in render_snapshot_report(snap, out_dir):
        click.echo(str(path))


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
def bench(config_path: str) -> None:
    """Run the leakage-controlled retrospective benchmark from a JSON config."""
    raw = json.loads(Path(config_path).read_text())
    corpus, _ = load_corpus(raw["corpus"])
    cue = None
    if raw.get("cue"):
        cue = DiscoveryCue(
            question=raw["cue"]["question"],
            keywords=tuple(raw["cue"].get("keywords", ())),
        )
    budget_raw = raw.get("budget", {})
    config = BenchmarkConfig(
        cutoff=date.fromisoformat(raw.get("cutoff", "2019-12-31")),
        window_end=date.fromisoformat(raw.get("window_end", "2026-01-01")),
        gap_targets=int(raw.get("gap_targets", 20)),
        pair_targets=int(raw.get("pair_targets", 10)),
        gold_limit=int(raw.get("gold_limit", 50)),
        seeds=tuple(raw.get("seeds", (1,))),
        hypotheses_per_target=int(raw.get("hypotheses_per_target", 3)),
        budget=RetrievalBudget(
            exemplars=int(budget_raw.get("exemplars", 8)),
            boundary=int(budget_raw.get("boundary", 8)),
            diverse=int(budget_raw.get("diverse", 0)),
            query=int(budget_raw.get("query", 0)),
        ),
        methods=tuple(raw.get("methods", ("orchestrator",))),
        cue=cue,
    )
    analysis = AnalysisConfig(
        graph_k=int(raw.get("graph_k", 21)),
        scales=tuple(raw.get("scales", (10, 20, 30, 40, 50))),
        pca_components=raw.get("pca_components", 102),
        cluster_mode=raw.get("cluster_mode", "leiden"),
        seed=int(raw.get("seed", 42)),
    )
    split = temporal_split(corpus, config.cutoff, config.window_end)
    historical = corpus.subset(split.historical_ids)
    future = corpus.subset(split.future_ids)
    encoder = HashingEncoder(dim=int(raw.get("encoder_dim", 256)))
    snapshot = analyze_corpus(historical, analysis, encoder=encoder)
    target_specs = derive_targets(
        snapshot, config.gap_targets, config.pair_targets
    )
    future_vectors = encoder.encode(future.texts())
    result = run_benchmark(
        snapshot, split, target_specs, future, future_vectors, config, MockGenerator(), encoder
    )
    out_dir = Path(raw.get("out_dir", "bench_out"))
    for path in render_benchmark_report(result, out_dir):
        click.echo(str(path))
    if raw.get("store"):
        store = SnapshotStore(raw["store"])
        store.publish_snapshot(snapshot)
        run_id = store.store_run(result.to_payload())
        store.close()
        click.echo(f"run {run_id}")
    for method, rep in result.reports.items():
        click.echo(
            f"{method}: mrr={rep.mrr:.4f} recall@10={rep.recall_at[10]:.4f} "
            f"gold_recovered={rep.rates['gold_recovered']:.4f}"
        )


@main.command()
@click.option("--store", "store_path", required=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(store_path: str, host: str, port: int) -> None:
    """Serve the HTTP API over a snapshot store."""
    import uvicorn

    from .server import create_app

    app = create_app(SnapshotStore(store_path))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
