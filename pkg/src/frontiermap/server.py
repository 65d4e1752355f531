"""HTTP API over a snapshot store: read-only map access plus pack,
brief, and review creation.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .calibration import CalibrationError, export_review_packets
from .generators import MockGenerator
from .embeddings import HashingEncoder
from .pack import DiscoveryCue, PackError, RetrievalBudget, build_pack
from .snapshot import NotFoundError, SnapshotStore
from .targets import TargetSpec
from .workflow import WorkflowError, run_workflow


class BudgetBody(BaseModel):
    exemplars: int = 8
    boundary: int = 8
    diverse: int = 0
    query: int = 0


class CueBody(BaseModel):
    question: str
    keywords: list[str] = Field(default_factory=list)


class TargetBody(BaseModel):
    kind: str
    region_id: Optional[int] = None
    pair: Optional[tuple[int, int]] = None


class PackRequest(BaseModel):
    target: TargetBody
    budget: BudgetBody = Field(default_factory=BudgetBody)
    cue: Optional[CueBody] = None
    queries: list[str] = Field(default_factory=list)


class BriefRequest(BaseModel):
    target: TargetBody
    budget: BudgetBody = Field(default_factory=BudgetBody)
    cue: Optional[CueBody] = None
    queries: list[str] = Field(default_factory=list)
    max_iters: int = 2
    n_ideas: int = 3


class ReviewRequest(BaseModel):
    reviewer: str
    hypothesis_index: int
    scores: dict
    comments: str = ""


def _target(body: TargetBody) -> TargetSpec:
    pair = tuple(sorted(body.pair)) if body.pair else None
    return TargetSpec(kind=body.kind, region_id=body.region_id, pair=pair)


def _cue(body: Optional[CueBody]) -> Optional[DiscoveryCue]:
    if body is None:
        return None
    return DiscoveryCue(question=body.question, keywords=tuple(body.keywords))


def create_app(store: SnapshotStore, generator=None, encoder=None) -> FastAPI:
    generator = generator or MockGenerator()
    encoder = encoder or HashingEncoder()
    app = FastAPI(title="frontiermap", version="0.1.0")

    def _snapshot(snapshot_id: str):
        try:
            return store.get_snapshot(snapshot_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/snapshots")
    def list_snapshots():
        return {"snapshots": store.list_snapshots()}

    @app.get("/snapshots/{snapshot_id}")
    def get_snapshot(snapshot_id: str):
        try:
            return store.get_snapshot_payload(snapshot_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/snapshots/{snapshot_id}/gaps/top")
    def top_gaps(snapshot_id: str, limit: int = 10):
        try:
            return {"gaps": store.list_top_gaps(snapshot_id, limit=limit)}
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/snapshots/{snapshot_id}/clusters")
    def clusters(snapshot_id: str):
        try:
            payload = store.get_snapshot_payload(snapshot_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        info = payload["clusters"]
        sizes: dict[int, int] = {}
        for label in info["labels"].values():
            sizes[label] = sizes.get(label, 0) + 1
        return {
            "method": info["method"],
            "fallback_used": info["fallback_used"],
            "params": info["params"],
            "clusters": [
                {"label": label, "size": size}
                for label, size in sorted(sizes.items(), key=lambda t: (-t[1], t[0]))
            ],
        }

    @app.get("/snapshots/{snapshot_id}/layout")
    def layout(snapshot_id: str):
        """Per-paper 2-D coordinates: the first two analysis components."""
        snap = _snapshot(snapshot_id)
        coords = snap.analysis_vectors[:, :2]
        return {
            "points": [
                {
                    "paper_id": pid,
                    "x": float(coords[i, 0]),
                    "y": float(coords[i, 1]) if coords.shape[1] > 1 else 0.0,
                    "cluster": int(snap.assignment.labels[i]),
                    "gap_score": float(snap.gap_scores[i]),
                }
                for i, pid in enumerate(snap.ids)
            ]
        }

    @app.post("/snapshots/{snapshot_id}/packs")
    def make_pack(snapshot_id: str, body: PackRequest):
        snap = _snapshot(snapshot_id)
        try:
            pack = build_pack(
                snap,
                _target(body.target),
                RetrievalBudget(**body.budget.model_dump()),
                cue=_cue(body.cue),
                queries=body.queries,
                encoder=encoder,
            )
        except PackError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return pack.to_payload()

    @app.post("/snapshots/{snapshot_id}/briefs")
    def make_brief(snapshot_id: str, body: BriefRequest):
        snap = _snapshot(snapshot_id)
        if hasattr(generator, "reset"):
            generator.reset()
        try:
            brief = run_workflow(
                snap,
                _target(body.target),
                RetrievalBudget(**body.budget.model_dump()),
                generator,
                cue=_cue(body.cue),
                queries=body.queries,
                max_iters=body.max_iters,
                n_ideas=body.n_ideas,
                encoder=encoder,
            )
        except WorkflowError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        brief_id = store.store_brief(snapshot_id, brief.to_payload())
        return {"brief_id": brief_id, "brief": brief.to_payload()}

    @app.get("/briefs/{brief_id}")
    def get_brief(brief_id: str):
        try:
            return store.get_brief(brief_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    def _packet_entries(brief_id: str, brief: dict) -> list[dict]:
        titles = {}
        try:
            payload = store.get_snapshot_payload(brief["snapshot_id"])
            titles = {p["paper_id"]: p.get("title", "") for p in payload["papers"]}
        except NotFoundError:
            pass
        entries = []
        for i, hyp in enumerate(brief["hypotheses"]):
            entries.append(
                {
                    "packet_id": f"{brief_id}:{i}",
                    "hypothesis": hyp,
                    "evidence": [
                        {"paper_id": pid, "title": titles.get(pid, "")}
                        for pid in hyp.get("citations", [])
                    ],
                    "provenance": {
                        "idea_scores": brief["idea_scores"][i],
                        "iterations": brief["iterations"],
                        "blueprint_index": brief["blueprint_index"],
                    },
                }
            )
        return entries

    @app.get("/briefs/{brief_id}/packets")
    def list_packets(brief_id: str):
        """Blind review packets: open sections only, provenance sealed."""
        try:
            brief = store.get_brief(brief_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        scorers = {str(s.get("scorer", "")) for s in brief["idea_scores"]}
        try:
            packets = export_review_packets(
                _packet_entries(brief_id, brief),
                forbidden_tokens=sorted(t for t in scorers if t),
            )
        except CalibrationError as exc:
            raise HTTPException(status_code=500, detail=str(exc)) from exc
        return {
            "packets": [
                {
                    "packet_id": p.packet_id,
                    "hypothesis_index": i,
                    "open_section": p.open_section,
                }
                for i, p in enumerate(packets)
            ]
        }

    @app.get("/briefs/{brief_id}/packets/{index}/sealed")
    def sealed_section(brief_id: str, index: int, review_id: str = ""):
        """Sealed provenance; requires the review id returned when a review
        of this hypothesis was submitted."""
        try:
            brief = store.get_brief(brief_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        if not 0 <= index < len(brief["hypotheses"]):
            raise HTTPException(status_code=404, detail=f"no packet {index}")
        submitted = any(
            r.get("review_id") == review_id and int(r.get("hypothesis_index", -1)) == index
            for r in store.list_reviews(brief_id)
        )
        if not submitted:
            raise HTTPException(
                status_code=403,
                detail="sealed section requires a submitted review of this hypothesis",
            )
        entry = _packet_entries(brief_id, brief)[index]
        return {"packet_id": entry["packet_id"], "sealed_section": entry["provenance"]}

    @app.post("/briefs/{brief_id}/reviews")
    def add_review(brief_id: str, body: ReviewRequest):
        try:
            review_id = store.store_review(brief_id, body.model_dump())
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"review_id": review_id}

    @app.get("/briefs/{brief_id}/reviews")
    def get_reviews(brief_id: str):
        try:
            store.get_brief(brief_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        return {"reviews": store.list_reviews(brief_id)}

    @app.get("/runs/{run_id}/metrics")
    def run_metrics(run_id: str):
        try:
            return store.get_run(run_id)
        except NotFoundError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    return app
