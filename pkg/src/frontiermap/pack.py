"""Provenance-annotated evidence packs for gap and cluster-pair targets.

Channels: cluster exemplars (nearest to centroid), boundary candidates
between two cluster prototypes, gap-region members, diverse
(farthest-point) supplements, and lexical query matches.  An optional
discovery cue steers retrieval and reorders the pack but is never
itself evidence.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .embeddings import tokenize
from .graph import cosine_distance
from .snapshot import Snapshot
from .targets import GapRegion, TargetSpec, rank_top_gaps


class PackError(ValueError):
    pass


@dataclass(frozen=True)
class RetrievalBudget:
    exemplars: int = 8
    boundary: int = 8
    diverse: int = 0
    query: int = 0

    def __post_init__(self) -> None:
        if min(self.exemplars, self.boundary, self.diverse, self.query) < 0:
            raise PackError("budget counts must be >= 0")
        if self.exemplars + self.boundary + self.diverse + self.query <= 0:
            raise PackError("total budget must be positive")

    def to_payload(self) -> dict:
        return {
            "exemplars": self.exemplars,
            "boundary": self.boundary,
            "diverse": self.diverse,
            "query": self.query,
        }


@dataclass(frozen=True)
class DiscoveryCue:
    question: str
    keywords: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        return " ".join([self.question, *self.keywords]).strip()

    def to_payload(self) -> dict:
        return {"question": self.question, "keywords": list(self.keywords)}


@dataclass
class EvidenceItem:
    paper_id: str
    selection_source: str
    selection_meta: dict = field(default_factory=dict)

    def to_payload(self) -> dict:
        return {
            "paper_id": self.paper_id,
            "selection_source": self.selection_source,
            "selection_meta": self.selection_meta,
        }


@dataclass
class EvidencePack:
    snapshot_id: str
    target: TargetSpec
    items: list[EvidenceItem]
    budget: RetrievalBudget
    cue: Optional[DiscoveryCue] = None
    queries: tuple[str, ...] = ()  # every lexical query issued, cue-derived included

    @property
    def paper_ids(self) -> list[str]:
        return [item.paper_id for item in self.items]

    def to_payload(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "target": self.target.to_payload(),
            "items": [item.to_payload() for item in self.items],
            "budget": self.budget.to_payload(),
            "cue": self.cue.to_payload() if self.cue else None,
            "queries": list(self.queries),
        }


def _centroid(snapshot: Snapshot, members: Sequence[int], vectors: np.ndarray) -> np.ndarray:
    return vectors[list(members)].mean(axis=0)


def cluster_exemplars(
    snapshot: Snapshot,
    cluster: int,
    n: int,
    vectors_available: bool = True,
) -> list[EvidenceItem]:
    """The n members nearest the cluster centroid under cosine distance,
    ties by paper id.  Without vectors: first n members by ascending id,
    flagged as a fallback."""
    members = snapshot.assignment.members(cluster)
    if not members:
        raise PackError(f"unknown or empty cluster: {cluster}")
    ids = snapshot.ids
    if not vectors_available:
        chosen = sorted(members, key=lambda i: ids[i])[:n]
        return [
            EvidenceItem(ids[i], f"cluster_{cluster}_exemplar", {"fallback": "id_order"})
            for i in chosen
        ]
    centroid = _centroid(snapshot, members, snapshot.vectors)
    scored = sorted(
        ((cosine_distance(snapshot.vectors[i], centroid), ids[i], i) for i in members),
        key=lambda t: (t[0], t[1]),
    )
    return [
        EvidenceItem(pid, f"cluster_{cluster}_exemplar", {"centroid_distance": d})
        for d, pid, _ in scored[:n]
    ]


def boundary_candidates(
    snapshot: Snapshot,
    a: int,
    b: int,
    n: int,
    vectors_available: bool = True,
) -> list[EvidenceItem]:
    """Members of either cluster ordered lexicographically by
    (margin |d_a - d_b|, midpoint (d_a + d_b)/2, d_a, paper id)."""
    if not vectors_available:
        raise PackError("boundary selection requires vectors")
    members_a = snapshot.assignment.members(a)
    members_b = snapshot.assignment.members(b)
    if not members_a or not members_b:
        raise PackError(f"empty cluster in pair ({a}, {b})")
    ids = snapshot.ids
    mu_a = _centroid(snapshot, members_a, snapshot.vectors)
    mu_b = _centroid(snapshot, members_b, snapshot.vectors)
    scored = []
    for i in sorted(set(members_a) | set(members_b)):
        d_a = cosine_distance(snapshot.vectors[i], mu_a)
        d_b = cosine_distance(snapshot.vectors[i], mu_b)
        margin = abs(d_a - d_b)
        midpoint = (d_a + d_b) / 2.0
        source_cluster = a if i in set(members_a) else b
        scored.append((margin, midpoint, d_a, ids[i], d_b, source_cluster))
    scored.sort(key=lambda t: (t[0], t[1], t[2], t[3]))
    return [
        EvidenceItem(
            pid,
            f"cluster_{cluster}_boundary",
            {"margin": m, "midpoint": s, "d_a": d_a, "d_b": d_b},
        )
        for m, s, d_a, pid, d_b, cluster in scored[:n]
    ]


def gap_member_items(snapshot: Snapshot, region: GapRegion, limit: int) -> list[EvidenceItem]:
    ids = snapshot.ids
    return [
        EvidenceItem(ids[i], "gap_member", {"gap_rank": rank, "gap_score": float(snapshot.gap_scores[i])})
        for i, rank in zip(region.member_indices[:limit], region.member_ranks[:limit])
    ]


def gap_pack_core(snapshot: Snapshot, region: GapRegion, budget: RetrievalBudget) -> list[EvidenceItem]:
    """Region members by gap-score rank up to the exemplar budget, then
    remaining exemplar slots filled round-robin across touched clusters
    in ascending label order."""
    items = gap_member_items(snapshot, region, budget.exemplars)
    remaining = budget.exemplars - len(items)
    if remaining > 0 and region.touched_clusters:
        per_cluster = {
            c: cluster_exemplars(snapshot, c, remaining) for c in region.touched_clusters
        }
        cursors = {c: 0 for c in region.touched_clusters}
        taken: set[str] = {item.paper_id for item in items}
        while remaining > 0:
            progressed = False
            for c in region.touched_clusters:
                while cursors[c] < len(per_cluster[c]):
                    candidate = per_cluster[c][cursors[c]]
                    cursors[c] += 1
                    if candidate.paper_id not in taken:
                        items.append(candidate)
                        taken.add(candidate.paper_id)
                        remaining -= 1
                        progressed = True
                        break
                if remaining == 0:
                    break
            if not progressed:
                break
    return items


def pair_pack_core(
    snapshot: Snapshot,
    pair: tuple[int, int],
    budget: RetrievalBudget,
) -> list[EvidenceItem]:
    """Exemplar budget split evenly between the two clusters (odd
    remainder to the smaller label), boundary candidates next, and
    unfilled boundary slots topped up from gap regions touching both
    clusters (by region rank, then member gap rank)."""
    a, b = sorted(pair)
    share_a = budget.exemplars // 2 + budget.exemplars % 2
    share_b = budget.exemplars // 2
    items = cluster_exemplars(snapshot, a, share_a) + cluster_exemplars(snapshot, b, share_b)
    boundary = boundary_candidates(snapshot, a, b, budget.boundary)
    items.extend(boundary)
    shortfall = budget.boundary - len(boundary)
    if shortfall > 0:
        taken = {item.paper_id for item in items}
        dual_regions = [
            r for r in rank_top_gaps(snapshot.regions) if a in r.touched_clusters and b in r.touched_clusters
        ]
        ids = snapshot.ids
        for region in dual_regions:
            for i, rank in zip(region.member_indices, region.member_ranks):
                if shortfall == 0:
                    break
                if ids[i] not in taken:
                    items.append(
                        EvidenceItem(ids[i], "gap_supplement", {"region_id": region.region_id, "gap_rank": rank})
                    )
                    taken.add(ids[i])
                    shortfall -= 1
            if shortfall == 0:
                break
    return items


def lexical_query_matches(
    snapshot: Snapshot,
    query: str,
    n: int,
    source: str = "lexical_query",
) -> list[EvidenceItem]:
    """Case-insensitive token scoring over title+abstract: a document's
    score is the sum of its occurrence counts of each query token."""
    if not query.strip():
        raise PackError("empty query")
    query_tokens = tokenize(query)
    scored = []
    for i, rec in enumerate(snapshot.corpus):
        counts = Counter(tokenize(rec.text))
        score = sum(counts[t] for t in query_tokens)
        if score > 0:
            scored.append((-score, rec.paper_id, score))
    scored.sort()
    return [
        EvidenceItem(pid, source, {"query": query, "token_score": score})
        for _, pid, score in scored[:n]
    ]


def diverse_items(
    snapshot: Snapshot,
    selected_ids: Sequence[str],
    n: int,
) -> list[EvidenceItem]:
    """Farthest-point sampling: repeatedly add the paper maximizing the
    minimum cosine distance to everything already selected, ties by id."""
    if n <= 0:
        return []
    ids = snapshot.ids
    taken = set(selected_ids)
    pool = [i for i, pid in enumerate(ids) if pid not in taken]
    anchors = [snapshot.index_of(pid) for pid in selected_ids]
    out: list[EvidenceItem] = []
    X = snapshot.vectors
    norms = np.linalg.norm(X, axis=1)
    while pool and len(out) < n:
        best = None
        for i in pool:
            if anchors:
                cos = X[anchors] @ X[i] / (norms[anchors] * norms[i])
                score = float(np.min(1.0 - cos))
            else:
                score = 1.0
            key = (-score, ids[i])
            if best is None or key < best[0]:
                best = (key, i, score)
        assert best is not None
        _, chosen, score = best
        out.append(EvidenceItem(ids[chosen], "diverse", {"min_distance": score}))
        anchors.append(chosen)
        pool.remove(chosen)
    return out


def cue_alignment_scores(snapshot: Snapshot, cue: DiscoveryCue, encoder) -> dict[str, float]:
    cue_vec = encoder.encode([cue.text])[0]
    norms = np.linalg.norm(snapshot.vectors, axis=1)
    cue_norm = np.linalg.norm(cue_vec)
    cos = snapshot.vectors @ cue_vec / (norms * cue_norm)
    return {pid: float((c + 1.0) / 2.0) for pid, c in zip(snapshot.ids, np.clip(cos, -1, 1))}


def build_pack(
    snapshot: Snapshot,
    target: TargetSpec,
    budget: RetrievalBudget,
    cue: Optional[DiscoveryCue] = None,
    queries: Sequence[str] = (),
    encoder=None,
    cue_query_limit: int = 4,
) -> EvidencePack:
    """Assemble the full pack: core channels in channel order with
    first-seen provenance on duplicates, then diverse and lexical-query
    channels, then cue steering (extra cue queries, per-item alignment,
    stable reorder by descending alignment)."""
    if target.kind == "gap":
        region = next((r for r in snapshot.regions if r.region_id == target.region_id), None)
        if region is None:
            raise PackError(f"unknown gap region: {target.region_id}")
        core = gap_pack_core(snapshot, region, budget)
    elif target.kind == "cluster_pair":
        if target.pair is None:
            raise PackError("cluster_pair target without labels")
        core = pair_pack_core(snapshot, target.pair, budget)
    else:
        raise PackError(f"unknown target kind: {target.kind}")

    merged: list[EvidenceItem] = []
    seen: set[str] = set()

    def extend(items: Sequence[EvidenceItem]) -> None:
        for item in items:
            if item.paper_id not in seen:
                seen.add(item.paper_id)
                merged.append(item)

    extend(core)
    extend(diverse_items(snapshot, [i.paper_id for i in merged], budget.diverse))
    issued: list[str] = []
    for query in queries:
        issued.append(query)
        if budget.query > 0:
            extend(lexical_query_matches(snapshot, query, budget.query))
    if cue is not None:
        for keyword in cue.keywords:
            issued.append(keyword)
            extend(
                lexical_query_matches(snapshot, keyword, cue_query_limit, source="discovery_cue_query")
            )
        if encoder is not None:
            alignment = cue_alignment_scores(snapshot, cue, encoder)
            for item in merged:
                item.selection_meta["cue_alignment"] = alignment[item.paper_id]
            merged.sort(key=lambda it: -it.selection_meta["cue_alignment"])
    if not merged:
        raise PackError("target yielded no evidence")
    return EvidencePack(
        snapshot_id=snapshot.snapshot_id,
        target=target,
        items=merged,
        budget=budget,
        cue=cue,
        queries=tuple(issued),
    )
