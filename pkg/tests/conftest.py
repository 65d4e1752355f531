"""Shared fixtures: synthetic corpora with planted cluster structure."""

from __future__ import annotations

import random

import numpy as np
import pytest

from frontiermap.corpus import Corpus, ingest_records
from frontiermap.pipeline import analyze_corpus
from frontiermap.snapshot import AnalysisConfig

THEMES = {
    0: ("silver nanoparticle antibacterial coating", ["silver", "nanoparticle", "antibacterial", "coating", "surface"]),
    1: ("mrna lipid nanoparticle vaccine delivery", ["mrna", "lipid", "vaccine", "delivery", "formulation"]),
    2: ("hydrogel wound dressing sustained release", ["hydrogel", "wound", "dressing", "sustained", "release"]),
    3: ("gold nanorod photothermal tumor therapy", ["gold", "nanorod", "photothermal", "tumor", "therapy"]),
}
FILLER = ["efficacy", "characterization", "synthesis", "stability", "toxicity", "biodistribution"]


def make_theme_records(
    n_per_theme: int = 15,
    seed: int = 7,
    themes: dict = THEMES,
    years=(2015, 2016, 2017, 2018, 2019),
    prefix: str = "p",
) -> list[dict]:
    rng = random.Random(seed)
    records = []
    idx = 0
    for theme, (title_base, words) in themes.items():
        for i in range(n_per_theme):
            toks = rng.sample(words, 3) + rng.sample(FILLER, 2)
            records.append(
                {
                    "paper_id": f"{prefix}{idx:04d}",
                    "title": f"{title_base} study {i}",
                    "abstract": "We report " + " ".join(toks) + " in a preclinical model.",
                    "year": rng.choice(list(years)),
                    "subject_labels": [f"theme-{theme}", "nanomedicine"],
                }
            )
            idx += 1
    return records


@pytest.fixture(scope="session")
def theme_corpus() -> Corpus:
    corpus, report = ingest_records(make_theme_records())
    assert not report.rejected
    return corpus


@pytest.fixture(scope="session")
def theme_snapshot(theme_corpus):
    config = AnalysisConfig(
        graph_k=10,
        scales=(5, 10),
        pca_components=30,
        cluster_mode="leiden",
        gap_quantile=0.9,
        min_gap_size=2,
        seed=42,
    )
    return analyze_corpus(theme_corpus, config)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance criterion pass/fail lines past output capture."""
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


def two_blobs(n_a: int, n_b: int, p: int, seed: int, spread: float = 0.1):
    """Two well-separated Gaussian blobs; returns (vectors, labels)."""
    rng = np.random.default_rng(seed)
    mu_a = np.zeros(p)
    mu_a[0] = 1.0
    mu_b = np.zeros(p)
    mu_b[1] = 1.0
    X = np.vstack(
        [
            mu_a + spread * rng.standard_normal((n_a, p)),
            mu_b + spread * rng.standard_normal((n_b, p)),
        ]
    )
    labels = np.array([0] * n_a + [1] * n_b)
    return X, labels
