"""Cosine kNN similarity graph and multi-scale gap scores.

Edges carry cosine similarity weights w = 1 - delta.  Per-paper sparsity
is the mean cosine distance to the k nearest neighbors at each scale in
K, z-standardized corpus-wide per scale and averaged across scales.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_GRAPH_K = 21
DEFAULT_SCALES = (10, 20, 30, 40, 50)


class GraphError(ValueError):
    pass


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """delta(u, v) = 1 - cos(u, v), in [0, 2].  Zero vectors are rejected."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise GraphError("cosine distance undefined for zero vector")
    return float(1.0 - float(u @ v) / (nu * nv))


def _distance_block(Z: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Cosine distances from ``rows`` of Z to all of Z, clipped to [0, 2]."""
    norms = np.linalg.norm(Z, axis=1)
    if np.any(norms == 0):
        bad = int(np.where(norms == 0)[0][0])
        raise GraphError(f"zero vector at row {bad}")
    cos = (Z[rows] @ Z.T) / np.outer(norms[rows], norms)
    return np.clip(1.0 - cos, 0.0, 2.0)


def _nearest(dist_row: np.ndarray, self_index: int, k: int) -> np.ndarray:
    """Indices of the k nearest neighbors, self excluded, ties broken by
    ascending index."""
    d = dist_row.copy()
    d[self_index] = np.inf
    order = np.lexsort((np.arange(d.size), d))
    return order[:k]


@dataclass
class SimilarityGraph:
    ids: tuple[str, ...]
    k: int
    metric: str = "cosine"
    # adjacency[i] maps neighbor index -> weight; undirected, no self-loops
    adjacency: list[dict[int, float]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.ids)

    def neighbors(self, i: int) -> dict[int, float]:
        return self.adjacency[i]

    def edges(self) -> list[tuple[int, int, float]]:
        out = []
        for i, nbrs in enumerate(self.adjacency):
            for j, w in nbrs.items():
                if i < j:
                    out.append((i, j, w))
        return out

    def to_payload(self) -> dict:
        return {
            "ids": list(self.ids),
            "k": self.k,
            "metric": self.metric,
            "edges": [[i, j, w] for i, j, w in self.edges()],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "SimilarityGraph":
        graph = cls(
            ids=tuple(payload["ids"]),
            k=int(payload["k"]),
            metric=payload.get("metric", "cosine"),
            adjacency=[dict() for _ in payload["ids"]],
        )
        for i, j, w in payload["edges"]:
            graph.adjacency[int(i)][int(j)] = float(w)
            graph.adjacency[int(j)][int(i)] = float(w)
        return graph


def build_knn_graph(
    Z: np.ndarray,
    k: int = DEFAULT_GRAPH_K,
    ids: Sequence[str] | None = None,
    batch_size: int = 1024,
) -> SimilarityGraph:
    """Exact cosine kNN graph: directed candidate edges to the k nearest
    neighbors (self excluded, ties by ascending index), symmetrized with
    the larger weight retained when both directions exist.

    Batching is a memory measure only; output is batch-size invariant.
    """
    n = Z.shape[0]
    if k >= n:
        raise GraphError(f"k={k} must be smaller than N={n}")
    if ids is None:
        ids = [str(i) for i in range(n)]
    adjacency: list[dict[int, float]] = [dict() for _ in range(n)]
    for start in range(0, n, batch_size):
        rows = np.arange(start, min(start + batch_size, n))
        dists = _distance_block(Z, rows)
        for local, i in enumerate(rows):
            for j in _nearest(dists[local], int(i), k):
                w = 1.0 - dists[local, j]
                j = int(j)
                i_ = int(i)
                # merge rule: the larger weight is retained
                prev = adjacency[i_].get(j)
                if prev is None or w > prev:
                    adjacency[i_][j] = w
                    adjacency[j][i_] = w
    return SimilarityGraph(ids=tuple(ids), k=k, adjacency=adjacency)


@dataclass(frozen=True)
class DensityTable:
    scales: tuple[int, ...]
    raw_means: np.ndarray  # (N, len(scales)) rho_i^(k)
    scale_means: np.ndarray  # mu_k per scale
    scale_stds: np.ndarray  # population sigma_k per scale
    gap_scores: np.ndarray  # (N,) g_i


def gap_scores(
    Z: np.ndarray,
    scales: Sequence[int] = DEFAULT_SCALES,
    batch_size: int = 1024,
) -> DensityTable:
    """Multi-scale standardized sparsity per paper.

    For each scale k, rho_i^(k) is the mean cosine distance to the k
    nearest neighbors (self excluded).  Each scale is z-standardized
    with population statistics; a degenerate scale (sigma_k = 0)
    contributes 0 for every paper.  The final g_i averages the
    standardized values over the scales.

    These distances are recomputed per scale over Z and are independent
    of any stored graph's k.
    """
    n = Z.shape[0]
    scales = tuple(int(s) for s in scales)
    if not scales:
        raise GraphError("at least one scale required")
    kmax = max(scales)
    if n <= kmax:
        raise GraphError(f"N={n} too small for max scale {kmax}; shrink the scale set")
    raw = np.zeros((n, len(scales)))
    for start in range(0, n, batch_size):
        rows = np.arange(start, min(start + batch_size, n))
        dists = _distance_block(Z, rows)
        for local, i in enumerate(rows):
            d = dists[local].copy()
            d[int(i)] = np.inf
            nearest = np.sort(d)[:kmax]
            for col, s in enumerate(scales):
                raw[int(i), col] = nearest[:s].mean()
    mu = raw.mean(axis=0)
    sigma = raw.std(axis=0)  # population std
    standardized = np.zeros_like(raw)
    nonzero = sigma > 0
    standardized[:, nonzero] = (raw[:, nonzero] - mu[nonzero]) / sigma[nonzero]
    return DensityTable(
        scales=scales,
        raw_means=raw,
        scale_means=mu,
        scale_stds=sigma,
        gap_scores=standardized.mean(axis=1),
    )
