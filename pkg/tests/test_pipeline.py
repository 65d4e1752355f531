"""Composition pipeline and generator backend tests."""

from __future__ import annotations

import httpx
import pytest

from frontiermap.generators import HttpGenerator, MockGenerator
from frontiermap.pack import RetrievalBudget, build_pack
from frontiermap.pipeline import PipelineError, analyze_corpus, derive_targets
from frontiermap.snapshot import AnalysisConfig
from frontiermap.corpus import ingest_records
from frontiermap.targets import TargetSpec
from frontiermap.workflow import WorkflowError


def test_analyze_requires_minimum_corpus():
    corpus, _ = ingest_records(
        [{"paper_id": "a", "title": "T", "year": 2020}, {"paper_id": "b", "title": "T", "year": 2020}]
    )
    with pytest.raises(PipelineError):
        analyze_corpus(corpus)


def test_snapshot_covers_all_papers(theme_snapshot, theme_corpus):
    assert set(theme_snapshot.ids) == set(theme_corpus.ids)
    assert theme_snapshot.vectors.shape[0] == len(theme_corpus)
    assert len(theme_snapshot.assignment.labels) == len(theme_corpus)


def test_derive_targets_counts(theme_snapshot):
    targets = derive_targets(theme_snapshot, gap_targets=2, pair_targets=3)
    gaps = [t for t in targets if t.kind == "gap"]
    pairs = [t for t in targets if t.kind == "cluster_pair"]
    assert len(gaps) <= 2
    assert len(pairs) <= 3
    assert len(set(t.key() for t in targets)) == len(targets)


def test_mock_generator_audit_plan(theme_snapshot):
    gen = MockGenerator(needs_patch_plan=(True, False), patch_queries=("q",))
    target = TargetSpec(kind="gap", region_id=theme_snapshot.regions[0].region_id)
    pack = build_pack(theme_snapshot, target, RetrievalBudget())
    exp = gen.explain(pack, theme_snapshot)
    assert gen.audit(exp, pack).needs_patch is True
    assert gen.audit(exp, pack).needs_patch is False
    # plan repeats its last step
    assert gen.audit(exp, pack).needs_patch is False
    gen.reset()
    assert gen.audit(exp, pack).needs_patch is True


def test_http_generator_round_trip(theme_snapshot):
    target = TargetSpec(kind="gap", region_id=theme_snapshot.regions[0].region_id)
    pack = build_pack(theme_snapshot, target, RetrievalBudget())
    mock = MockGenerator()

    def handler(request: httpx.Request):
        import json

        body = json.loads(request.content)
        stage = body["stage"]
        if stage == "explain":
            return httpx.Response(200, json=mock.explain(pack, theme_snapshot).to_payload())
        if stage == "audit":
            return httpx.Response(
                200, json=mock.audit(None, pack).to_payload()
            )
        if stage == "ideate":
            hyps = mock.ideate(pack, None, body["payload"]["n"], theme_snapshot)
            return httpx.Response(200, json={"hypotheses": [h.to_payload() for h in hyps]})
        if stage == "judge":
            return httpx.Response(200, json={"scores": None})
        if stage == "blueprint":
            hyps = mock.ideate(pack, None, 1, theme_snapshot)
            return httpx.Response(200, json={"sections": mock.blueprint(hyps[0], pack).to_payload()})
        return httpx.Response(500)

    gen = HttpGenerator("http://gen", client=httpx.Client(transport=httpx.MockTransport(handler)))
    explanation = gen.explain(pack, theme_snapshot)
    assert explanation.side_summaries
    hyps = gen.ideate(pack, explanation, 2, theme_snapshot)
    assert len(hyps) == 2
    assert gen.judge(hyps[0], pack) is None
    plan = gen.blueprint(hyps[0], pack)
    assert plan.sections["materials"]


def test_http_generator_transport_error_tagged(theme_snapshot):
    def handler(request):
        raise httpx.ConnectError("down")

    target = TargetSpec(kind="gap", region_id=theme_snapshot.regions[0].region_id)
    pack = build_pack(theme_snapshot, target, RetrievalBudget())
    gen = HttpGenerator("http://gen", client=httpx.Client(transport=httpx.MockTransport(handler)))
    with pytest.raises(WorkflowError) as err:
        gen.explain(pack, theme_snapshot)
    assert err.value.stage == "explain"
