"""Audited workflow tests: iteration bounds, grounding, scoring."""

from __future__ import annotations

import pytest

from frontiermap.generators import MockGenerator
from frontiermap.pack import DiscoveryCue, RetrievalBudget, build_pack
from frontiermap.snapshot import SnapshotStore
from frontiermap.targets import TargetSpec
from frontiermap.workflow import (
    BLUEPRINT_SECTIONS,
    Blueprint,
    Hypothesis,
    IdeaScores,
    WorkflowError,
    heuristic_scores,
    patch_retrieve,
    run_workflow,
    select_blueprint_idea,
)


def _gap_target(snapshot) -> TargetSpec:
    assert snapshot.regions, "fixture snapshot must have gap regions"
    return TargetSpec(kind="gap", region_id=snapshot.regions[0].region_id)


def test_single_pass_when_no_patch_needed(theme_snapshot):
    gen = MockGenerator(needs_patch_plan=(False,))
    brief = run_workflow(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen)
    assert brief.iterations == 1
    assert len(brief.hypotheses) == 3
    assert set(brief.blueprint.sections) == set(BLUEPRINT_SECTIONS)


def test_iterations_bounded_by_max_iters(theme_snapshot):
    gen = MockGenerator(needs_patch_plan=(True, True, True), patch_queries=("silver",))
    brief = run_workflow(
        theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen, max_iters=2
    )
    assert brief.iterations == 2
    gen2 = MockGenerator(needs_patch_plan=(True, True, True, True), patch_queries=("silver",))
    brief4 = run_workflow(
        theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen2, max_iters=4
    )
    assert brief4.iterations == 4


def test_patch_never_shrinks_pack(theme_snapshot):
    gen = MockGenerator(needs_patch_plan=(True, False), patch_queries=("hydrogel wound",))
    pack = build_pack(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget())
    audit = gen.audit(None, pack)
    patched = patch_retrieve(pack, audit, theme_snapshot)
    assert len(patched.items) >= len(pack.items)
    assert set(pack.paper_ids) <= set(patched.paper_ids)
    assert "hydrogel wound" in patched.queries


def test_invalid_citations_fail_after_one_regeneration(theme_snapshot):
    gen = MockGenerator(emit_invalid_citation=True)
    with pytest.raises(WorkflowError) as err:
        run_workflow(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen)
    assert err.value.stage == "ideate"
    assert "grounding" in str(err.value)


def test_all_citations_resolve_to_pack(theme_snapshot):
    gen = MockGenerator()
    brief = run_workflow(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen)
    pack_ids = set(brief.pack.paper_ids)
    for hyp in brief.hypotheses:
        assert hyp.citations
        assert set(hyp.citations) <= pack_ids


def test_heuristic_scores_hand_oracle(theme_snapshot):
    pack = build_pack(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget())
    cited = pack.paper_ids[:2]
    body = f"First fact [{cited[0]}]. Second fact [{cited[1]}]. Unsupported claim here."
    hyp = Hypothesis(title="t", body=body, citations=tuple(cited))
    scores = heuristic_scores(hyp, pack, theme_snapshot)
    # evaluability: 1 + 4 * min(1, 2/5)
    assert scores.evaluability == pytest.approx(1.0 + 4.0 * 0.4)
    # feasibility: 2 of 3 sentences carry a citation
    assert scores.feasibility == pytest.approx(1.0 + 4.0 * (2.0 / 3.0))
    assert scores.importance == 3.0
    assert scores.plausibility == 3.0
    assert scores.likely_impact == 3.0
    assert 1.0 <= scores.novelty <= 5.0
    assert scores.scorer == "heuristic"


def test_judge_scores_preferred_over_heuristic(theme_snapshot):
    judge = IdeaScores(5, 5, 5, 5, 5, 5, scorer="judge")
    gen = MockGenerator(judge_scores=judge)
    brief = run_workflow(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen)
    assert all(s.scorer == "judge" for s in brief.idea_scores)


def test_select_blueprint_idea_ties_to_earlier():
    a = IdeaScores(3, 3, 3, 3, 3, 3, scorer="judge")
    b = IdeaScores(4, 4, 4, 4, 4, 4, scorer="judge")
    assert select_blueprint_idea([a, b, b]) == 1
    assert select_blueprint_idea([a, a]) == 0


def test_idea_scores_range_enforced():
    with pytest.raises(ValueError):
        IdeaScores(0.5, 3, 3, 3, 3, 3, scorer="judge")


def test_blueprint_requires_all_sections():
    with pytest.raises(ValueError):
        Blueprint(sections={"materials": "x"})


def test_brief_published_to_store(theme_snapshot, tmp_path):
    store = SnapshotStore(tmp_path / "store")
    store.publish_snapshot(theme_snapshot)
    gen = MockGenerator()
    brief = run_workflow(
        theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), gen, store=store
    )
    ids = store.list_briefs(theme_snapshot.snapshot_id)
    assert len(ids) == 1
    stored = store.get_brief(ids[0])
    assert stored["hypotheses"] == [h.to_payload() for h in brief.hypotheses]
    store.close()


def test_brief_deterministic(theme_snapshot):
    briefs = [
        run_workflow(theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), MockGenerator())
        for _ in range(2)
    ]
    assert briefs[0].to_payload() == briefs[1].to_payload()


def test_cue_gate_triggers_extra_iteration(theme_snapshot):
    """A cue aligned with nothing drives mean alignment below the gate and
    forces a patch pass even when the audit is clean."""
    from frontiermap.embeddings import HashingEncoder

    gen = MockGenerator(needs_patch_plan=(False, False), patch_queries=("silver",))
    cue = DiscoveryCue(question="zzz qqq xxx", keywords=("silver",))
    brief = run_workflow(
        theme_snapshot,
        _gap_target(theme_snapshot),
        RetrievalBudget(),
        gen,
        cue=cue,
        encoder=HashingEncoder(dim=256),
        max_iters=2,
        cue_gate=1.1,  # force the gate to fail
    )
    assert brief.iterations == 2


def test_config_validation(theme_snapshot):
    with pytest.raises(WorkflowError):
        run_workflow(
            theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), MockGenerator(), max_iters=0
        )
    with pytest.raises(WorkflowError):
        run_workflow(
            theme_snapshot, _gap_target(theme_snapshot), RetrievalBudget(), MockGenerator(), n_ideas=0
        )
