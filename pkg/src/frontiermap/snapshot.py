"""Immutable, content-addressed analysis snapshots plus brief/review
persistence.

A snapshot is the canonical serialization of papers, cluster labels, gap
scores, gap regions, and configuration, hashed with SHA-256 together
with the vector sidecar bytes.  Storage is a single SQLite file per
deployment with flat binary sidecars for vectors; published rows are
protected by SQL triggers, so every mutation path is rejected at the
store level.
"""

from __future__ import annotations

import hashlib
import json
import sqlite3
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .community import ClusterAssignment
from .corpus import Corpus, PaperRecord, parse_record, record_to_dict
from .graph import DEFAULT_GRAPH_K, DEFAULT_SCALES
from .targets import GapRegion, rank_top_gaps


class SnapshotError(ValueError):
    pass


class ImmutableSnapshotError(RuntimeError):
    """A write path targeted an already-published snapshot."""


class NotFoundError(KeyError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    encoder_name: str = "hashing-v1"
    pca_components: Optional[int] = 102
    graph_k: int = DEFAULT_GRAPH_K
    scales: tuple[int, ...] = DEFAULT_SCALES
    gap_quantile: float = 0.95
    min_gap_size: int = 3
    cluster_mode: str = "leiden"
    resolution: float = 1.0
    kmeans_k: Optional[int] = None
    seed: int = 42

    def to_payload(self) -> dict:
        return {
            "encoder_name": self.encoder_name,
            "pca_components": self.pca_components,
            "graph_k": self.graph_k,
            "scales": list(self.scales),
            "gap_quantile": self.gap_quantile,
            "min_gap_size": self.min_gap_size,
            "cluster_mode": self.cluster_mode,
            "resolution": self.resolution,
            "kmeans_k": self.kmeans_k,
            "seed": self.seed,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "AnalysisConfig":
        return cls(
            encoder_name=payload["encoder_name"],
            pca_components=payload.get("pca_components"),
            graph_k=int(payload["graph_k"]),
            scales=tuple(int(s) for s in payload["scales"]),
            gap_quantile=float(payload["gap_quantile"]),
            min_gap_size=int(payload["min_gap_size"]),
            cluster_mode=payload["cluster_mode"],
            resolution=float(payload["resolution"]),
            kmeans_k=payload.get("kmeans_k"),
            seed=int(payload["seed"]),
        )


def canonical_json(payload: object) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Snapshot:
    """Frozen analysis state.  Row-aligned arrays follow the sorted-by-id
    paper order so the content hash is independent of insertion order."""

    corpus: Corpus
    vectors: np.ndarray  # primary embedding space, (N, p)
    analysis_vectors: np.ndarray  # PCA analysis space, (N, r)
    assignment: ClusterAssignment
    gap_scores: np.ndarray  # (N,)
    regions: tuple[GapRegion, ...]
    config: AnalysisConfig
    snapshot_id: str = ""
    created_at: str = ""

    @property
    def ids(self) -> tuple[str, ...]:
        return self.corpus.ids

    def index_of(self, paper_id: str) -> int:
        return self.ids.index(paper_id)

    def to_payload(self) -> dict:
        ids = self.ids
        return {
            "config": self.config.to_payload(),
            "papers": [record_to_dict(r) for r in self.corpus],
            "clusters": {
                "method": self.assignment.method,
                "params": self.assignment.params,
                "fallback_used": self.assignment.fallback_used,
                "labels": {pid: int(c) for pid, c in zip(ids, self.assignment.labels)},
            },
            "gap_scores": {pid: float(g) for pid, g in zip(ids, self.gap_scores)},
            "gap_regions": [
                {
                    "region_id": r.region_id,
                    "member_ids": [ids[i] for i in r.member_indices],
                    "mean_gap_score": r.mean_gap_score,
                    "touched_clusters": list(r.touched_clusters),
                }
                for r in self.regions
            ],
            "vectors_sha256": hashlib.sha256(
                np.ascontiguousarray(self.vectors, dtype="<f4").tobytes()
            ).hexdigest(),
            "analysis_sha256": hashlib.sha256(
                np.ascontiguousarray(self.analysis_vectors, dtype="<f4").tobytes()
            ).hexdigest(),
        }

    def content_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_payload()).encode()).hexdigest()


def build_snapshot(
    corpus: Corpus,
    vectors: np.ndarray,
    analysis_vectors: np.ndarray,
    assignment: ClusterAssignment,
    gap_scores: np.ndarray,
    regions: Sequence[GapRegion],
    config: AnalysisConfig,
) -> Snapshot:
    """Canonicalize analysis outputs (given in corpus order) into a
    Snapshot with rows sorted by paper id."""
    ids = corpus.ids
    n = len(ids)
    if vectors.shape[0] != n or analysis_vectors.shape[0] != n or gap_scores.shape[0] != n:
        raise SnapshotError("row-aligned inputs disagree on N")
    if len(assignment.labels) != n:
        raise SnapshotError("cluster labels disagree on N")
    order = sorted(range(n), key=lambda i: ids[i])
    old_to_new = {old: new for new, old in enumerate(order)}
    sorted_corpus = corpus.subset(ids[i] for i in order)
    sorted_assignment = replace(assignment, labels=tuple(assignment.labels[i] for i in order))
    sorted_regions = tuple(
        replace(r, member_indices=tuple(old_to_new[i] for i in r.member_indices)) for r in regions
    )
    for region in sorted_regions:
        for idx in region.member_indices:
            if not 0 <= idx < n:
                raise SnapshotError(f"gap region {region.region_id} cites unknown paper index")
    snap = Snapshot(
        corpus=sorted_corpus,
        vectors=np.ascontiguousarray(vectors[order]),
        analysis_vectors=np.ascontiguousarray(analysis_vectors[order]),
        assignment=sorted_assignment,
        gap_scores=gap_scores[order],
        regions=sorted_regions,
        config=config,
    )
    return replace(snap, snapshot_id=snap.content_hash())


def snapshot_from_payload(payload: dict, vectors: np.ndarray, analysis_vectors: np.ndarray) -> Snapshot:
    records = [parse_record(raw) for raw in payload["papers"]]
    corpus = Corpus(records)
    ids = corpus.ids
    index = {pid: i for i, pid in enumerate(ids)}
    clusters = payload["clusters"]
    assignment = ClusterAssignment(
        labels=tuple(int(clusters["labels"][pid]) for pid in ids),
        method=clusters["method"],
        params=clusters.get("params", {}),
        fallback_used=bool(clusters.get("fallback_used", False)),
    )
    gaps = np.array([float(payload["gap_scores"][pid]) for pid in ids])
    regions = tuple(
        GapRegion(
            region_id=int(r["region_id"]),
            member_indices=tuple(index[pid] for pid in r["member_ids"]),
            member_ranks=tuple(range(1, len(r["member_ids"]) + 1)),
            mean_gap_score=float(r["mean_gap_score"]),
            touched_clusters=tuple(int(c) for c in r["touched_clusters"]),
        )
        for r in payload["gap_regions"]
    )
    snap = Snapshot(
        corpus=corpus,
        vectors=vectors,
        analysis_vectors=analysis_vectors,
        assignment=assignment,
        gap_scores=gaps,
        regions=regions,
        config=AnalysisConfig.from_payload(payload["config"]),
        created_at=payload.get("_created_at", ""),
    )
    return replace(snap, snapshot_id=snap.content_hash())


_SCHEMA = """
CREATE TABLE IF NOT EXISTS snapshots (
    snapshot_id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS briefs (
    brief_id TEXT PRIMARY KEY,
    snapshot_id TEXT NOT NULL REFERENCES snapshots(snapshot_id),
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS reviews (
    review_id TEXT PRIMARY KEY,
    brief_id TEXT NOT NULL REFERENCES briefs(brief_id),
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS runs (
    run_id TEXT PRIMARY KEY,
    created_at TEXT NOT NULL,
    payload TEXT NOT NULL
);
CREATE TRIGGER IF NOT EXISTS snapshots_no_update
BEFORE UPDATE ON snapshots
BEGIN SELECT RAISE(ABORT, 'snapshots are immutable'); END;
CREATE TRIGGER IF NOT EXISTS snapshots_no_delete
BEFORE DELETE ON snapshots
BEGIN SELECT RAISE(ABORT, 'snapshots are immutable'); END;
"""


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class SnapshotStore:
    """Single-writer embedded store; safe for many concurrent readers."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.db_path = self.root / "store.db"
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()

    def close(self) -> None:
        self._conn.close()

    # -- snapshots ---------------------------------------------------------

    def _sidecar(self, snapshot_id: str, kind: str) -> Path:
        return self.root / f"{snapshot_id}.{kind}.f32"

    def publish_snapshot(self, snap: Snapshot) -> str:
        """Persist a snapshot; idempotent on identical content.  The row
        only becomes visible after the sidecars are fully written."""
        payload = snap.to_payload()
        snapshot_id = hashlib.sha256(canonical_json(payload).encode()).hexdigest()
        existing = self._conn.execute(
            "SELECT 1 FROM snapshots WHERE snapshot_id = ?", (snapshot_id,)
        ).fetchone()
        if existing:
            return snapshot_id
        for kind, arr in (("x", snap.vectors), ("z", snap.analysis_vectors)):
            self._sidecar(snapshot_id, kind).write_bytes(
                np.ascontiguousarray(arr, dtype="<f4").tobytes()
            )
        shapes = {
            "x_dim": int(snap.vectors.shape[1]),
            "z_dim": int(snap.analysis_vectors.shape[1]),
        }
        payload["_shapes"] = shapes
        created = _now()
        payload["_created_at"] = created
        self._conn.execute(
            "INSERT INTO snapshots (snapshot_id, created_at, payload) VALUES (?, ?, ?)",
            (snapshot_id, created, json.dumps(payload)),
        )
        self._conn.commit()
        return snapshot_id

    def mutate_snapshot(self, snapshot_id: str, **_changes) -> None:
        """Every in-place change path lands here and is rejected."""
        try:
            self._conn.execute(
                "UPDATE snapshots SET payload = payload WHERE snapshot_id = ?", (snapshot_id,)
            )
        except sqlite3.DatabaseError as exc:
            raise ImmutableSnapshotError(str(exc)) from exc
        raise ImmutableSnapshotError("snapshots are immutable")

    def delete_snapshot(self, snapshot_id: str) -> None:
        try:
            self._conn.execute("DELETE FROM snapshots WHERE snapshot_id = ?", (snapshot_id,))
        except sqlite3.DatabaseError as exc:
            raise ImmutableSnapshotError(str(exc)) from exc
        raise ImmutableSnapshotError("snapshots are immutable")

    def list_snapshots(self) -> list[dict]:
        rows = self._conn.execute(
            "SELECT snapshot_id, created_at, payload FROM snapshots ORDER BY created_at"
        ).fetchall()
        out = []
        for snapshot_id, created_at, payload in rows:
            data = json.loads(payload)
            out.append(
                {
                    "snapshot_id": snapshot_id,
                    "created_at": created_at,
                    "paper_count": len(data["papers"]),
                    "cluster_count": len(
                        {c for c in data["clusters"]["labels"].values() if c != -1}
                    ),
                    "gap_region_count": len(data["gap_regions"]),
                    "config": data["config"],
                }
            )
        return out

    def get_snapshot(self, snapshot_id: str) -> Snapshot:
        row = self._conn.execute(
            "SELECT payload FROM snapshots WHERE snapshot_id = ?", (snapshot_id,)
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown snapshot: {snapshot_id}")
        payload = json.loads(row[0])
        n = len(payload["papers"])
        shapes = payload["_shapes"]
        vectors = np.frombuffer(self._sidecar(snapshot_id, "x").read_bytes(), dtype="<f4")
        analysis = np.frombuffer(self._sidecar(snapshot_id, "z").read_bytes(), dtype="<f4")
        return snapshot_from_payload(
            payload,
            vectors.reshape(n, shapes["x_dim"]).astype(np.float64),
            analysis.reshape(n, shapes["z_dim"]).astype(np.float64),
        )

    def get_snapshot_payload(self, snapshot_id: str) -> dict:
        row = self._conn.execute(
            "SELECT payload FROM snapshots WHERE snapshot_id = ?", (snapshot_id,)
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown snapshot: {snapshot_id}")
        return json.loads(row[0])

    def list_top_gaps(self, snapshot_id: str, limit: int = 10) -> list[dict]:
        """Ranked gap summaries (no vectors), by mean score then size."""
        payload = self.get_snapshot_payload(snapshot_id)
        regions = [
            GapRegion(
                region_id=int(r["region_id"]),
                member_indices=tuple(range(len(r["member_ids"]))),
                member_ranks=tuple(range(1, len(r["member_ids"]) + 1)),
                mean_gap_score=float(r["mean_gap_score"]),
                touched_clusters=tuple(r["touched_clusters"]),
            )
            for r in payload["gap_regions"]
        ]
        ranked = rank_top_gaps(regions, limit)
        by_id = {int(r["region_id"]): r for r in payload["gap_regions"]}
        return [
            {
                "region_id": r.region_id,
                "size": r.size,
                "mean_gap_score": r.mean_gap_score,
                "touched_clusters": list(r.touched_clusters),
                "member_ids": by_id[r.region_id]["member_ids"],
            }
            for r in ranked
        ]

    # -- briefs and reviews ------------------------------------------------

    def store_brief(self, snapshot_id: str, payload: dict) -> str:
        if not self._conn.execute(
            "SELECT 1 FROM snapshots WHERE snapshot_id = ?", (snapshot_id,)
        ).fetchone():
            raise NotFoundError(f"unknown snapshot: {snapshot_id}")
        body = dict(payload)
        body["snapshot_id"] = snapshot_id
        brief_id = hashlib.sha256(canonical_json(body).encode()).hexdigest()
        self._conn.execute(
            "INSERT OR IGNORE INTO briefs (brief_id, snapshot_id, created_at, payload) "
            "VALUES (?, ?, ?, ?)",
            (brief_id, snapshot_id, _now(), json.dumps(body)),
        )
        self._conn.commit()
        return brief_id

    def get_brief(self, brief_id: str) -> dict:
        row = self._conn.execute(
            "SELECT payload, created_at FROM briefs WHERE brief_id = ?", (brief_id,)
        ).fetchone()
        if row is None:
            raise NotFoundError(f"unknown brief: {brief_id}")
        payload = json.loads(row[0])
        payload["brief_id"] = brief_id
        payload["created_at"] = row[1]
        return payload

    def list_briefs(self, snapshot_id: Optional[str] = None) -> list[str]:
        if snapshot_id:
            rows = self._conn.execute(
                "SELECT brief_id FROM briefs WHERE snapshot_id = ? ORDER BY created_at",
                (snapshot_id,),
            ).fetchall()
        else:
            rows = self._conn.execute("SELECT brief_id FROM briefs ORDER BY created_at").fetchall()
        return [r[0] for r in rows]

    def store_review(self, brief_id: str, payload: dict) -> str:
        if not self._conn.execute("SELECT 1 FROM briefs WHERE brief_id = ?", (brief_id,)).fetchone():
            raise NotFoundError(f"unknown brief: {brief_id}")
        body = dict(payload)
        body["brief_id"] = brief_id
        review_id = hashlib.sha256(canonical_json(body).encode() + _now().encode()).hexdigest()[:24]
        self._conn.execute(
            "INSERT INTO reviews (review_id, brief_id, created_at, payload) VALUES (?, ?, ?, ?)",
            (review_id, brief_id, _now(), json.dumps(body)),
        )
        self._conn.commit()
        return review_id

    def list_reviews(self, brief_id: str) -> list[dict]:
        rows = self._conn.execute(
            "SELECT review_id, created_at, payload FROM reviews WHERE brief_id = ? ORDER BY created_at",
            (brief_id,),
        ).fetchall()
        out = []
        for review_id, created_at, payload in rows:
            data = json.loads(payload)
            data["review_id"] = review_id
            data["created_at"] = created_at
            out.append(data)
        return out

    # -- benchmark runs ----------------------------------------------------

    def store_run(self, payload: dict) -> str:
        run_id = hashlib.sha256(canonical_json(payload).encode()).hexdigest()[:24]
        self._conn.execute(
            "INSERT OR IGNORE INTO runs (run_id, created_at, payload) VALUES (?, ?, ?)",
            (run_id, _now(), json.dumps(payload)),
        )
        self._conn.commit()
        return run_id

    def get_run(self, run_id: str) -> dict:
        row = self._conn.execute("SELECT payload FROM runs WHERE run_id = ?", (run_id,)).fetchone()
        if row is None:
            raise NotFoundError(f"unknown run: {run_id}")
        return json.loads(row[0])
