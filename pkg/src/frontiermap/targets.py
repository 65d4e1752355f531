"""Gap regions and cluster-pair bridge targets.

Gap regions are connected components, of size >= m, of the similarity
graph induced on papers above the gap-score quantile.  Cluster pairs are
derived from clusters co-occurring around top-ranked regions, with a
size-based backoff over the largest clusters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .community import NOISE_LABEL, ClusterAssignment
from .graph import SimilarityGraph

logger = logging.getLogger(__name__)

DEFAULT_QUANTILE = 0.95
DEFAULT_MIN_SIZE = 3


class TargetError(ValueError):
    pass


@dataclass(frozen=True)
class GapRegion:
    region_id: int
    member_indices: tuple[int, ...]  # ordered by descending gap score, ties by index
    member_ranks: tuple[int, ...]  # 1-based rank within the region, aligned with members
    mean_gap_score: float
    touched_clusters: tuple[int, ...] = ()

    @property
    def size(self) -> int:
        return len(self.member_indices)


@dataclass(frozen=True)
class TargetSpec:
    kind: str  # "gap" | "cluster_pair"
    region_id: Optional[int] = None
    pair: Optional[tuple[int, int]] = None  # sorted ascending
    provenance: str = ""

    def key(self) -> str:
        if self.kind == "gap":
            return f"gap_{self.region_id}"
        assert self.pair is not None
        return f"pair_{self.pair[0]}_{self.pair[1]}"

    def to_payload(self) -> dict:
        return {
            "kind": self.kind,
            "region_id": self.region_id,
            "pair": list(self.pair) if self.pair else None,
            "provenance": self.provenance,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "TargetSpec":
        pair = payload.get("pair")
        return cls(
            kind=payload["kind"],
            region_id=payload.get("region_id"),
            pair=(int(pair[0]), int(pair[1])) if pair else None,
            provenance=payload.get("provenance", ""),
        )


def nearest_rank_quantile(scores: np.ndarray, tau: float) -> float:
    """Inclusive nearest-rank quantile: the ceil(tau * N)-th smallest score."""
    if not 0.0 < tau < 1.0:
        raise TargetError(f"quantile must be in (0, 1), got {tau}")
    ordered = np.sort(scores)
    rank = max(1, math.ceil(tau * scores.size))
    return float(ordered[rank - 1])


def extract_gap_regions(
    scores: np.ndarray,
    graph: SimilarityGraph,
    tau: float = DEFAULT_QUANTILE,
    min_size: int = DEFAULT_MIN_SIZE,
    assignment: Optional[ClusterAssignment] = None,
) -> list[GapRegion]:
    """Threshold scores at the tau-quantile, take connected components of
    the induced subgraph, and keep components of size >= min_size.
    Analysis-stage ordering is by size descending (ties by smallest
    member index)."""
    if scores.size != graph.n:
        raise TargetError("scores and graph cover different id sets")
    threshold = nearest_rank_quantile(scores, tau)
    candidates = {int(i) for i in np.where(scores >= threshold)[0]}
    seen: set[int] = set()
    components: list[list[int]] = []
    for start in sorted(candidates):
        if start in seen:
            continue
        stack, comp = [start], []
        seen.add(start)
        while stack:
            node = stack.pop()
            comp.append(node)
            for j in graph.adjacency[node]:
                if j in candidates and j not in seen:
                    seen.add(j)
                    stack.append(j)
        if len(comp) >= min_size:
            components.append(comp)
    components.sort(key=lambda comp: (-len(comp), min(comp)))
    regions = []
    for region_id, comp in enumerate(components):
        ordered = sorted(comp, key=lambda i: (-scores[i], i))
        touched: tuple[int, ...] = ()
        if assignment is not None:
            touched = touched_clusters(ordered, assignment)
        regions.append(
            GapRegion(
                region_id=region_id,
                member_indices=tuple(ordered),
                member_ranks=tuple(range(1, len(ordered) + 1)),
                mean_gap_score=float(scores[ordered].mean()),
                touched_clusters=touched,
            )
        )
    return regions


def rank_top_gaps(regions: Sequence[GapRegion], limit: Optional[int] = None) -> list[GapRegion]:
    """Descending mean gap score, ties by size descending, then region id."""
    ranked = sorted(regions, key=lambda r: (-r.mean_gap_score, -r.size, r.region_id))
    return ranked[:limit] if limit is not None else ranked


def touched_clusters(members: Sequence[int], assignment: ClusterAssignment) -> tuple[int, ...]:
    """Sorted set of non-noise cluster labels among the member papers."""
    return tuple(sorted({assignment.labels[i] for i in members} - {NOISE_LABEL}))


def derive_cluster_pairs(
    ranked_regions: Sequence[GapRegion],
    assignment: ClusterAssignment,
    want: int,
) -> list[TargetSpec]:
    """Unordered cluster pairs from each top region's touched clusters,
    in region-rank order then ascending pair order, deduplicated; if
    short of ``want``, back off to pairs among the largest clusters."""
    sizes = assignment.sizes()
    sizes.pop(NOISE_LABEL, None)
    if len(sizes) < 2:
        logger.warning("fewer than 2 clusters: no cluster-pair targets")
        return []
    out: list[TargetSpec] = []
    seen: set[tuple[int, int]] = set()
    for region in ranked_regions:
        touched = sorted(set(region.touched_clusters) - {NOISE_LABEL})
        for a_pos in range(len(touched)):
            for b_pos in range(a_pos + 1, len(touched)):
                pair = (touched[a_pos], touched[b_pos])
                if pair not in seen:
                    seen.add(pair)
                    out.append(
                        TargetSpec(kind="cluster_pair", pair=pair, provenance=f"gap_{region.region_id}")
                    )
    if len(out) < want:
        # largest-first pair enumeration among cluster sizes
        by_size = sorted(sizes, key=lambda c: (-sizes[c], c))
        for a_pos in range(len(by_size)):
            for b_pos in range(a_pos + 1, len(by_size)):
                pair = tuple(sorted((by_size[a_pos], by_size[b_pos])))
                if pair not in seen:
                    seen.add(pair)  # type: ignore[arg-type]
                    out.append(TargetSpec(kind="cluster_pair", pair=pair, provenance="size-backoff"))
                if len(out) >= want:
                    break
            if len(out) >= want:
                break
    return out[:want] if want else out
