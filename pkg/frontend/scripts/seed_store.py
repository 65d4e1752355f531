"""Seed a deterministic fixture snapshot store for the UI test backend.

Usage: python3 seed_store.py <store_dir>
Prints the published snapshot id on stdout.
"""

from __future__ import annotations

import random
import sys

from frontiermap.corpus import ingest_records
from frontiermap.pipeline import analyze_corpus
from frontiermap.snapshot import AnalysisConfig, SnapshotStore

THEMES = {
    0: ("silver nanoparticle antibacterial coating", ["silver", "nanoparticle", "antibacterial", "coating", "surface"]),
    1: ("mrna lipid nanoparticle vaccine delivery", ["mrna", "lipid", "vaccine", "delivery", "formulation"]),
    2: ("hydrogel wound dressing sustained release", ["hydrogel", "wound", "dressing", "sustained", "release"]),
    3: ("gold nanorod photothermal tumor therapy", ["gold", "nanorod", "photothermal", "tumor", "therapy"]),
}
FILLER = ["efficacy", "characterization", "synthesis", "stability", "toxicity"]


def make_records(n_per_theme: int = 15, seed: int = 7) -> list[dict]:
    rng = random.Random(seed)
    records = []
    idx = 0
    for theme, (title_base, words) in THEMES.items():
        for i in range(n_per_theme):
            toks = rng.sample(words, 3) + rng.sample(FILLER, 2)
            records.append(
                {
                    "paper_id": f"p{idx:04d}",
                    "title": f"{title_base} study {i}",
                    "abstract": "We report " + " ".join(toks) + " in a preclinical model.",
                    "year": rng.choice([2015, 2016, 2017, 2018, 2019]),
                    "subject_labels": [f"theme-{theme}", "nanomedicine"],
                }
            )
            idx += 1
    return records


def main() -> None:
    store_dir = sys.argv[1]
    corpus, report = ingest_records(make_records())
    assert not report.rejected
    config = AnalysisConfig(
        graph_k=10,
        scales=(5, 10),
        pca_components=30,
        cluster_mode="leiden",
        gap_quantile=0.9,
        min_gap_size=2,
        seed=42,
    )
    snapshot = analyze_corpus(corpus, config)
    store = SnapshotStore(store_dir)
    snapshot_id = store.publish_snapshot(snapshot)
    store.close()
    print(snapshot_id)


if __name__ == "__main__":
    main()
