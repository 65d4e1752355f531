"""Community detection and K-means tests with planted partitions."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import two_blobs
from frontiermap.community import (
    ClusterError,
    default_kmeans_k,
    graph_communities,
    kmeans_cluster,
    modularity,
    select_operational,
)
from frontiermap.graph import SimilarityGraph, build_knn_graph


def _ring_graph(n: int, w: float = 1.0) -> SimilarityGraph:
    g = SimilarityGraph(ids=tuple(str(i) for i in range(n)), k=2, adjacency=[dict() for _ in range(n)])
    for i in range(n):
        j = (i + 1) % n
        g.adjacency[i][j] = w
        g.adjacency[j][i] = w
    return g


def test_modularity_hand_oracle():
    """Two disjoint dyads: hand-computed Q = 1/2 for the perfect split."""
    g = SimilarityGraph(ids=("a", "b", "c", "d"), k=1, adjacency=[{1: 1.0}, {0: 1.0}, {3: 1.0}, {2: 1.0}])
    # 2m = 4; intra = full weight; sum_deg^2 per comm = (1+1)^2 = 4 each
    # Q = 1 - (4 + 4) / 16 = 0.5
    assert modularity(g, [0, 0, 1, 1]) == pytest.approx(0.5)
    # everything in one community: Q = 1 - 16/16 = 0
    assert modularity(g, [0, 0, 0, 0]) == pytest.approx(0.0)


def test_modularity_resolution_monotone():
    g = _ring_graph(8)
    labels = [0, 0, 0, 0, 1, 1, 1, 1]
    assert modularity(g, labels, resolution=2.0) < modularity(g, labels, resolution=1.0)


def test_graph_communities_two_components():
    """Disconnected components can never share a community."""
    X, planted = two_blobs(20, 20, 6, seed=1, spread=0.05)
    graph = build_knn_graph(X, k=4)
    result = graph_communities(graph, seed=42)
    assert result.method == "leiden"
    labels = np.array(result.labels)
    # planted split recovered exactly (up to label names)
    assert len(set(labels[:20])) == 1
    assert len(set(labels[20:])) == 1
    assert labels[0] != labels[20]


def test_graph_communities_deterministic():
    X, _ = two_blobs(15, 15, 5, seed=3)
    graph = build_knn_graph(X, k=4)
    a = graph_communities(graph, seed=42)
    b = graph_communities(graph, seed=42)
    assert a.labels == b.labels


def test_labels_renumbered_by_descending_size():
    X, _ = two_blobs(25, 10, 5, seed=4, spread=0.05)
    graph = build_knn_graph(X, k=3)
    result = graph_communities(graph, seed=42)
    sizes = result.sizes()
    ordered = sorted(sizes.values(), reverse=True)
    assert [sizes[c] for c in sorted(sizes)] == ordered


def test_default_kmeans_k_bounds():
    assert default_kmeans_k(3) == 2
    assert default_kmeans_k(100) == 10
    assert default_kmeans_k(10_000) == 20


def test_kmeans_recovers_planted_blobs():
    X, planted = two_blobs(30, 20, 8, seed=5, spread=0.05)
    result = kmeans_cluster(X, k=2, seed=42)
    labels = np.array(result.labels)
    assert len(set(labels[:30])) == 1
    assert len(set(labels[30:])) == 1
    assert labels[0] != labels[30]
    # larger blob gets label 0
    assert labels[0] == 0


def test_kmeans_k_equals_n_is_legal():
    X = np.random.default_rng(0).standard_normal((6, 3))
    result = kmeans_cluster(X, k=6, seed=1)
    assert result.n_clusters == 6
    assert sorted(result.sizes().values()) == [1] * 6


def test_kmeans_invalid_k():
    X = np.ones((5, 2))
    with pytest.raises(ClusterError):
        kmeans_cluster(X, k=1)
    with pytest.raises(ClusterError):
        kmeans_cluster(X, k=6)


def test_kmeans_deterministic_per_seed():
    X, _ = two_blobs(20, 20, 6, seed=6)
    assert kmeans_cluster(X, k=4, seed=7).labels == kmeans_cluster(X, k=4, seed=7).labels


def test_select_operational_modes():
    X, _ = two_blobs(15, 15, 5, seed=8, spread=0.05)
    graph = build_knn_graph(X, k=4)
    leiden = select_operational("leiden", graph=graph, Z=X, seed=42)
    assert leiden.method == "leiden" and not leiden.fallback_used
    km = select_operational("kmeans", Z=X, kmeans_k=2, seed=42)
    assert km.method == "kmeans" and not km.fallback_used
    with pytest.raises(ClusterError):
        select_operational("banana", graph=graph, Z=X)


def test_select_operational_fallback_recorded():
    X, _ = two_blobs(10, 10, 4, seed=9)
    # no graph provided forces the fallback path for the graph mode
    result = select_operational("leiden", graph=None, Z=X, seed=42)
    assert result.fallback_used is True
    assert result.method == "kmeans"
    assert result.params.get("fallback_from") == "leiden"
