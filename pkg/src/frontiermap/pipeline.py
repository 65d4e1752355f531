"""End-to-end composition: corpus in, published snapshot and targets out.

This is the one place that wires embeddings, the similarity graph,
clustering, gap scoring, and region extraction together, so the CLI and
the HTTP server share identical behavior.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .community import select_operational
from .corpus import Corpus
from .embeddings import EmbeddingMatrix, HashingEncoder, analysis_space
from .graph import build_knn_graph, gap_scores
from .snapshot import AnalysisConfig, Snapshot, build_snapshot
from .targets import TargetSpec, derive_cluster_pairs, extract_gap_regions, rank_top_gaps


class PipelineError(ValueError):
    pass


def encode_corpus(corpus: Corpus, config: AnalysisConfig, encoder=None) -> EmbeddingMatrix:
    encoder = encoder or HashingEncoder(name=config.encoder_name)
    vectors = encoder.encode(corpus.texts())
    return EmbeddingMatrix(
        ids=corpus.ids,
        vectors=vectors,
        normalized=True,
        encoder_name=getattr(encoder, "name", config.encoder_name),
    )


def analyze_corpus(
    corpus: Corpus,
    config: Optional[AnalysisConfig] = None,
    encoder=None,
    vectors: Optional[np.ndarray] = None,
) -> Snapshot:
    """Run the full analysis and return an unsorted-input, sorted-output
    snapshot.  Neighborhood sizes are clamped to N-1 so small corpora
    still analyze cleanly."""
    config = config or AnalysisConfig()
    n = len(corpus)
    if n < 3:
        raise PipelineError(f"need at least 3 papers, got {n}")
    # canonicalize to sorted-id order up front so every stage (tie breaks,
    # sweep order, region numbering) is independent of insertion order
    order = sorted(range(n), key=lambda i: corpus.ids[i])
    if order != list(range(n)):
        if vectors is not None:
            vectors = vectors[order]
        corpus = corpus.subset(corpus.ids[i] for i in order)
    if vectors is None:
        matrix = encode_corpus(corpus, config, encoder)
        vectors = matrix.vectors
    else:
        if vectors.shape[0] != n:
            raise PipelineError("vectors misaligned with corpus")
        matrix = EmbeddingMatrix(
            ids=corpus.ids, vectors=vectors, normalized=False, encoder_name=config.encoder_name
        )
    Z = analysis_space(matrix, config.pca_components)
    # guard against rank-deficient projections collapsing rows to zero
    if np.any(np.linalg.norm(Z, axis=1) == 0):
        Z = np.array(matrix.vectors, dtype=np.float64)

    k = min(config.graph_k, n - 1)
    graph = build_knn_graph(Z, k=k, ids=list(corpus.ids))
    scales = tuple(s for s in config.scales if s <= n - 1) or (n - 1,)
    density = gap_scores(Z, scales=scales)
    assignment = select_operational(
        config.cluster_mode,
        graph=graph,
        Z=Z,
        resolution=config.resolution,
        kmeans_k=config.kmeans_k,
        seed=config.seed,
    )
    regions = extract_gap_regions(
        density.gap_scores,
        graph,
        tau=config.gap_quantile,
        min_size=config.min_gap_size,
        assignment=assignment,
    )
    return build_snapshot(
        corpus=corpus,
        vectors=np.asarray(matrix.vectors, dtype=np.float64),
        analysis_vectors=Z,
        assignment=assignment,
        gap_scores=density.gap_scores,
        regions=regions,
        config=config,
    )


def derive_targets(
    snapshot: Snapshot,
    gap_targets: int = 20,
    pair_targets: int = 10,
) -> list[TargetSpec]:
    """Top gap regions as gap targets followed by derived cluster pairs."""
    ranked = rank_top_gaps(snapshot.regions)
    gaps = [
        TargetSpec(kind="gap", region_id=r.region_id, provenance="top_gap")
        for r in ranked[:gap_targets]
    ]
    pairs = derive_cluster_pairs(ranked, snapshot.assignment, pair_targets)
    return gaps + pairs
