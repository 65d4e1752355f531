"""HTTP API tests via the in-process test client."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from frontiermap.server import create_app
from frontiermap.snapshot import SnapshotStore


@pytest.fixture()
def client_and_id(theme_snapshot, tmp_path):
    store = SnapshotStore(tmp_path / "store")
    sid = store.publish_snapshot(theme_snapshot)
    client = TestClient(create_app(store))
    yield client, sid, theme_snapshot
    store.close()


def test_list_and_get_snapshot(client_and_id):
    client, sid, snap = client_and_id
    listing = client.get("/snapshots").json()["snapshots"]
    assert [s["snapshot_id"] for s in listing] == [sid]
    payload = client.get(f"/snapshots/{sid}").json()
    assert len(payload["papers"]) == len(snap.corpus)
    assert client.get("/snapshots/nope").status_code == 404


def test_top_gaps_endpoint_matches_store(client_and_id):
    client, sid, snap = client_and_id
    gaps = client.get(f"/snapshots/{sid}/gaps/top", params={"limit": 3}).json()["gaps"]
    assert len(gaps) <= 3
    means = [g["mean_gap_score"] for g in gaps]
    assert means == sorted(means, reverse=True)


def test_clusters_endpoint(client_and_id):
    client, sid, snap = client_and_id
    body = client.get(f"/snapshots/{sid}/clusters").json()
    assert body["method"] == snap.assignment.method
    assert sum(c["size"] for c in body["clusters"]) == len(snap.corpus)
    sizes = [c["size"] for c in body["clusters"]]
    assert sizes == sorted(sizes, reverse=True)


def test_pack_endpoint_and_errors(client_and_id):
    client, sid, snap = client_and_id
    region_id = snap.regions[0].region_id
    resp = client.post(
        f"/snapshots/{sid}/packs",
        json={"target": {"kind": "gap", "region_id": region_id}, "budget": {"exemplars": 4, "boundary": 0}},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["items"]
    assert body["target"]["kind"] == "gap"
    bad = client.post(
        f"/snapshots/{sid}/packs", json={"target": {"kind": "gap", "region_id": 9999}}
    )
    assert bad.status_code == 422


def test_brief_review_flow(client_and_id):
    client, sid, snap = client_and_id
    region_id = snap.regions[0].region_id
    resp = client.post(
        f"/snapshots/{sid}/briefs",
        json={
            "target": {"kind": "gap", "region_id": region_id},
            "cue": {"question": "bridge silver and hydrogel work", "keywords": ["silver"]},
        },
    )
    assert resp.status_code == 200
    brief_id = resp.json()["brief_id"]
    brief = client.get(f"/briefs/{brief_id}").json()
    assert len(brief["hypotheses"]) == 3
    assert brief["blueprint"]

    review = client.post(
        f"/briefs/{brief_id}/reviews",
        json={"reviewer": "r1", "hypothesis_index": 0, "scores": {"novelty": 4, "importance": 3}},
    )
    assert review.status_code == 200
    reviews = client.get(f"/briefs/{brief_id}/reviews").json()["reviews"]
    assert len(reviews) == 1 and reviews[0]["reviewer"] == "r1"

    assert client.get("/briefs/missing").status_code == 404
    assert (
        client.post("/briefs/missing/reviews", json={"reviewer": "r", "hypothesis_index": 0, "scores": {}}).status_code
        == 404
    )


def test_layout_endpoint(client_and_id):
    client, sid, snap = client_and_id
    points = client.get(f"/snapshots/{sid}/layout").json()["points"]
    assert len(points) == len(snap.corpus)
    assert {p["paper_id"] for p in points} == set(snap.ids)
    for p in points:
        assert set(p) == {"paper_id", "x", "y", "cluster", "gap_score"}
    assert client.get("/snapshots/nope/layout").status_code == 404


def _make_brief(client, sid, snap):
    region_id = snap.regions[0].region_id
    resp = client.post(
        f"/snapshots/{sid}/briefs",
        json={"target": {"kind": "gap", "region_id": region_id}},
    )
    assert resp.status_code == 200
    return resp.json()["brief_id"]


def test_blind_packets_hide_provenance(client_and_id):
    client, sid, snap = client_and_id
    brief_id = _make_brief(client, sid, snap)
    brief = client.get(f"/briefs/{brief_id}").json()
    packets = client.get(f"/briefs/{brief_id}/packets").json()["packets"]
    assert len(packets) == len(brief["hypotheses"])
    for packet in packets:
        open_section = packet["open_section"]
        assert open_section["title"]
        assert "idea_scores" not in open_section
        blob = str(open_section)
        assert "scorer" not in blob
        # cited evidence carries titles joined from the snapshot
        assert all(ev["title"] for ev in open_section["evidence"])


def test_sealed_section_requires_submitted_review(client_and_id):
    client, sid, snap = client_and_id
    brief_id = _make_brief(client, sid, snap)
    # no token, wrong token: rejected
    assert client.get(f"/briefs/{brief_id}/packets/0/sealed").status_code == 403
    assert (
        client.get(f"/briefs/{brief_id}/packets/0/sealed", params={"review_id": "x"}).status_code
        == 403
    )
    review = client.post(
        f"/briefs/{brief_id}/reviews",
        json={"reviewer": "r1", "hypothesis_index": 0, "scores": {"novelty": 3}},
    ).json()
    # token is bound to the reviewed hypothesis only
    assert (
        client.get(
            f"/briefs/{brief_id}/packets/1/sealed", params={"review_id": review["review_id"]}
        ).status_code
        == 403
    )
    sealed = client.get(
        f"/briefs/{brief_id}/packets/0/sealed", params={"review_id": review["review_id"]}
    )
    assert sealed.status_code == 200
    section = sealed.json()["sealed_section"]
    brief = client.get(f"/briefs/{brief_id}").json()
    assert section["idea_scores"] == brief["idea_scores"][0]
    assert client.get(f"/briefs/{brief_id}/packets/9/sealed").status_code == 404


def test_run_metrics_endpoint(client_and_id, tmp_path):
    client, sid, snap = client_and_id
    assert client.get("/runs/none/metrics").status_code == 404
