"""Operational clustering: weighted graph communities (Louvain local
moving plus a split-refinement sweep) with a seeded K-means fallback.

Exactly one assignment is propagated downstream; it always records which
mode produced it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import SimilarityGraph

NOISE_LABEL = -1
DEFAULT_RESOLUTION = 1.0
DEFAULT_SEED = 42


class ClusterError(ValueError):
    pass


@dataclass(frozen=True)
class ClusterAssignment:
    labels: tuple[int, ...]  # -1 reserved for noise; neither mode here emits it
    method: str  # "leiden" | "kmeans"
    params: dict = field(default_factory=dict)
    fallback_used: bool = False

    @property
    def n_clusters(self) -> int:
        return len({c for c in self.labels if c != NOISE_LABEL})

    def sizes(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for c in self.labels:
            out[c] = out.get(c, 0) + 1
        return out

    def members(self, label: int) -> list[int]:
        return [i for i, c in enumerate(self.labels) if c == label]


def _canonical_labels(raw: Sequence[int]) -> tuple[int, ...]:
    """Renumber labels 0..C-1 by descending community size, ties by the
    smallest member index.  Noise (-1) passes through."""
    sizes: dict[int, int] = {}
    first_member: dict[int, int] = {}
    for i, c in enumerate(raw):
        if c == NOISE_LABEL:
            continue
        sizes[c] = sizes.get(c, 0) + 1
        first_member.setdefault(c, i)
    order = sorted(sizes, key=lambda c: (-sizes[c], first_member[c]))
    remap = {old: new for new, old in enumerate(order)}
    return tuple(NOISE_LABEL if c == NOISE_LABEL else remap[c] for c in raw)


def modularity(graph: SimilarityGraph, labels: Sequence[int], resolution: float = 1.0) -> float:
    """Weighted undirected modularity with a resolution parameter."""
    m2 = 0.0  # 2m = total degree
    degree = np.zeros(graph.n)
    for i, nbrs in enumerate(graph.adjacency):
        for j, w in nbrs.items():
            degree[i] += w
            m2 += w
    if m2 == 0:
        return 0.0
    intra = 0.0
    comm_degree: dict[int, float] = {}
    for i, nbrs in enumerate(graph.adjacency):
        comm_degree[labels[i]] = comm_degree.get(labels[i], 0.0) + degree[i]
        for j, w in nbrs.items():
            if labels[i] == labels[j]:
                intra += w
    q = intra / m2
    for total in comm_degree.values():
        q -= resolution * (total / m2) ** 2
    return q


def _local_moving(
    graph: SimilarityGraph,
    labels: list[int],
    resolution: float,
    rng: np.random.Generator,
) -> bool:
    """One Louvain local-moving phase; returns True if any node moved."""
    n = graph.n
    degree = np.array([sum(nbrs.values()) for nbrs in graph.adjacency])
    m2 = float(degree.sum())
    if m2 == 0:
        return False
    comm_degree: dict[int, float] = {}
    for i in range(n):
        comm_degree[labels[i]] = comm_degree.get(labels[i], 0.0) + degree[i]

    moved_any = False
    improved = True
    order = np.arange(n)
    while improved:
        improved = False
        rng.shuffle(order)
        for i in order:
            i = int(i)
            current = labels[i]
            # weights to each neighboring community
            link: dict[int, float] = {}
            for j, w in graph.adjacency[i].items():
                link[labels[j]] = link.get(labels[j], 0.0) + w
            comm_degree[current] -= degree[i]
            best_comm, best_gain = current, 0.0
            base = link.get(current, 0.0) - resolution * comm_degree[current] * degree[i] / m2
            for comm in sorted(link):
                gain = link[comm] - resolution * comm_degree.get(comm, 0.0) * degree[i] / m2
                if gain - base > 1e-12 and (gain - base > best_gain + 1e-12):
                    best_comm, best_gain = comm, gain - base
            comm_degree[best_comm] = comm_degree.get(best_comm, 0.0) + degree[i]
            if best_comm != current:
                labels[i] = best_comm
                improved = True
                moved_any = True
    return moved_any


def _aggregate(graph: SimilarityGraph, labels: Sequence[int]) -> tuple[SimilarityGraph, list[int]]:
    comms = sorted(set(labels))
    index = {c: i for i, c in enumerate(comms)}
    agg = SimilarityGraph(
        ids=tuple(str(c) for c in comms),
        k=graph.k,
        adjacency=[dict() for _ in comms],
    )
    for i, nbrs in enumerate(graph.adjacency):
        ci = index[labels[i]]
        for j, w in nbrs.items():
            if i < j:
                cj = index[labels[j]]
                if ci != cj:
                    agg.adjacency[ci][cj] = agg.adjacency[ci].get(cj, 0.0) + w
                    agg.adjacency[cj][ci] = agg.adjacency[ci][cj]
    return agg, [index[c] for c in sorted(index, key=lambda c: index[c])]


def _split_disconnected(graph: SimilarityGraph, labels: list[int]) -> list[int]:
    """Refinement sweep: every community becomes one label per connected
    component of its induced subgraph.  Splitting disconnected parts
    never decreases modularity."""
    next_label = max(labels) + 1
    for comm in sorted(set(labels)):
        members = [i for i in range(graph.n) if labels[i] == comm]
        member_set = set(members)
        seen: set[int] = set()
        components: list[list[int]] = []
        for start in members:
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                node = stack.pop()
                comp.append(node)
                for j in graph.adjacency[node]:
                    if j in member_set and j not in seen:
                        seen.add(j)
                        stack.append(j)
            components.append(comp)
        for comp in components[1:]:
            for node in comp:
                labels[node] = next_label
            next_label += 1
    return labels


def graph_communities(
    graph: SimilarityGraph,
    resolution: float = DEFAULT_RESOLUTION,
    seed: int = DEFAULT_SEED,
) -> ClusterAssignment:
    """Modularity community detection on edge weights: Louvain local
    moving with aggregation, then a community-split refinement sweep.
    Deterministic for a fixed seed; singleton components become their
    own clusters."""
    if graph.n == 0:
        raise ClusterError("empty graph")
    rng = np.random.default_rng(seed)
    level_graph = graph
    # membership[i] = node of level_graph that original node i collapsed into
    membership = list(range(graph.n))
    while True:
        level_labels = list(range(level_graph.n))
        moved = _local_moving(level_graph, level_labels, resolution, rng)
        if not moved:
            break
        comms = sorted(set(level_labels))
        index = {c: i for i, c in enumerate(comms)}
        membership = [index[level_labels[m]] for m in membership]
        level_graph, _ = _aggregate(level_graph, level_labels)
        if level_graph.n <= 1:
            break
    labels = _split_disconnected(graph, list(membership))
    return ClusterAssignment(
        labels=_canonical_labels(labels),
        method="leiden",
        params={"resolution": resolution, "seed": seed},
    )


def default_kmeans_k(n: int) -> int:
    """Bounded square-root heuristic keeping cluster counts sane."""
    return min(20, max(2, int(np.sqrt(n))))


def kmeans_cluster(
    Z: np.ndarray,
    k: Optional[int] = None,
    seed: int = DEFAULT_SEED,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterAssignment:
    """Seeded K-means: greedy-spread (farthest-point) initialization,
    Lloyd iterations to a relative inertia tolerance, labels renumbered
    by descending cluster size."""
    n = Z.shape[0]
    if k is None:
        k = default_kmeans_k(n)
    if not 2 <= k <= n:
        raise ClusterError(f"K={k} out of range [2, {n}]")
    rng = np.random.default_rng(seed)
    centers = np.empty((k, Z.shape[1]))
    first = int(rng.integers(n))
    centers[0] = Z[first]
    mind = np.linalg.norm(Z - centers[0], axis=1)
    for c in range(1, k):
        centers[c] = Z[int(np.argmax(mind))]
        mind = np.minimum(mind, np.linalg.norm(Z - centers[c], axis=1))
    prev_inertia = np.inf
    labels = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        d2 = ((Z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = Z[mask].mean(axis=0)
            else:
                # revive empty cluster with the worst-fit point
                worst = int(np.argmax(d2[np.arange(n), labels]))
                centers[c] = Z[worst]
        if prev_inertia - inertia <= tol * max(prev_inertia, 1e-30):
            break
        prev_inertia = inertia
    return ClusterAssignment(
        labels=_canonical_labels([int(c) for c in labels]),
        method="kmeans",
        params={"k": k, "seed": seed},
    )


def select_operational(
    mode: str,
    graph: Optional[SimilarityGraph] = None,
    Z: Optional[np.ndarray] = None,
    resolution: float = DEFAULT_RESOLUTION,
    kmeans_k: Optional[int] = None,
    seed: int = DEFAULT_SEED,
) -> ClusterAssignment:
    """Run the requested clustering mode; on graph-community failure fall
    back to K-means (recorded in the result)."""
    if mode not in ("graph_community", "leiden", "kmeans"):
        raise ClusterError(f"unknown cluster mode: {mode}")
    if mode in ("graph_community", "leiden"):
        try:
            if graph is None:
                raise ClusterError("no graph available")
            return graph_communities(graph, resolution=resolution, seed=seed)
        except ClusterError:
            if Z is None:
                raise
            fallback = kmeans_cluster(Z, k=kmeans_k, seed=seed)
            return ClusterAssignment(
                labels=fallback.labels,
                method=fallback.method,
                params={**fallback.params, "fallback_from": "leiden"},
                fallback_used=True,
            )
    if Z is None:
        raise ClusterError("kmeans mode requires vectors")
    return kmeans_cluster(Z, k=kmeans_k, seed=seed)
