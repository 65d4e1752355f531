"""Report rendering: delimited tables plus matplotlib figures on disk.

Every report call writes its tables as tab-separated files and its
figures as PNGs into the same output directory, returning the paths.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import BenchmarkResult, RECOVERY_LABELS
from .embeddings import fit_projection, apply_projection
from .snapshot import Snapshot
from .targets import rank_top_gaps


def write_delimited(rows: Sequence[dict], path: str | Path, delimiter: str = "\t") -> Path:
    path = Path(path)
    if not rows:
        path.write_text("")
        return path
    fields = list(rows[0].keys())
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, delimiter=delimiter)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in fields})
    return path


def render_snapshot_report(snapshot: Snapshot, out_dir: str | Path) -> list[Path]:
    """Gap table plus three figures: gap-score histogram, cluster sizes,
    and a 2D map colored by cluster."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    ranked = rank_top_gaps(snapshot.regions)
    gap_rows = [
        {
            "region_id": r.region_id,
            "size": r.size,
            "mean_gap_score": f"{r.mean_gap_score:.6f}",
            "touched_clusters": ",".join(str(c) for c in r.touched_clusters),
            "member_ids": ";".join(snapshot.ids[i] for i in r.member_indices),
        }
        for r in ranked
    ]
    written.append(write_delimited(gap_rows, out / "gap_regions.tsv"))

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(snapshot.gap_scores, bins=30, color="#4c72b0")
    ax.set_xlabel("gap score")
    ax.set_ylabel("papers")
    ax.set_title("Gap score distribution")
    fig.tight_layout()
    fig.savefig(out / "gap_scores.png", dpi=120)
    plt.close(fig)
    written.append(out / "gap_scores.png")

    sizes = snapshot.assignment.sizes()
    labels = sorted(sizes, key=lambda c: (-sizes[c], c))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([str(c) for c in labels], [sizes[c] for c in labels], color="#55a868")
    ax.set_xlabel("cluster")
    ax.set_ylabel("papers")
    ax.set_title(f"Cluster sizes ({snapshot.assignment.method})")
    fig.tight_layout()
    fig.savefig(out / "cluster_sizes.png", dpi=120)
    plt.close(fig)
    written.append(out / "cluster_sizes.png")

    Z = snapshot.analysis_vectors
    if Z.shape[1] > 2:
        model = fit_projection(Z, 2)
        coords = apply_projection(model, Z)
    else:
        coords = np.asarray(Z, dtype=float)
        if coords.shape[1] == 1:
            coords = np.column_stack([coords[:, 0], np.zeros(len(coords))])
    fig, ax = plt.subplots(figsize=(6, 5))
    scatter = ax.scatter(
        coords[:, 0], coords[:, 1], c=snapshot.assignment.labels, s=14, cmap="tab20"
    )
    ax.set_title("Corpus map (2D projection)")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.colorbar(scatter, ax=ax, label="cluster")
    fig.tight_layout()
    fig.savefig(out / "corpus_map.png", dpi=120)
    plt.close(fig)
    written.append(out / "corpus_map.png")
    return written


def render_benchmark_report(result: BenchmarkResult, out_dir: str | Path) -> list[Path]:
    """Per-method metric and per-task tables plus recall and
    recovery-rate figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    metric_rows = []
    for method, report in result.reports.items():
        row = {
            "method": method,
            "n_tasks": report.n_tasks,
            "recall_at_1": f"{report.recall_at[1]:.4f}",
            "recall_at_5": f"{report.recall_at[5]:.4f}",
            "recall_at_10": f"{report.recall_at[10]:.4f}",
            "mrr": f"{report.mrr:.4f}",
        }
        for label in RECOVERY_LABELS:
            row[label] = f"{report.rates[label]:.4f}"
        metric_rows.append(row)
    written.append(write_delimited(metric_rows, out / "benchmark_metrics.tsv"))
    written.append(
        write_delimited([r.to_payload() for r in result.rows], out / "benchmark_tasks.tsv")
    )

    methods = list(result.reports)
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.25
    x = np.arange(len(methods))
    for offset, k in enumerate((1, 5, 10)):
        ax.bar(
            x + (offset - 1) * width,
            [result.reports[m].recall_at[k] for m in methods],
            width,
            label=f"recall@{k}",
        )
    ax.set_xticks(x)
    ax.set_xticklabels(methods, rotation=30, ha="right")
    ax.set_ylabel("recall")
    ax.set_title("Gold recovery by method")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "benchmark_recall.png", dpi=120)
    plt.close(fig)
    written.append(out / "benchmark_recall.png")

    fig, ax = plt.subplots(figsize=(7, 4))
    bottom = np.zeros(len(methods))
    for label in RECOVERY_LABELS:
        values = np.array([result.reports[m].rates[label] for m in methods])
        ax.bar(methods, values, bottom=bottom, label=label)
        bottom += values
    ax.set_ylabel("proportion of tasks")
    ax.set_title("Recovery outcomes by method")
    ax.legend(fontsize=8)
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    fig.savefig(out / "benchmark_recovery.png", dpi=120)
    plt.close(fig)
    written.append(out / "benchmark_recovery.png")
    return written
