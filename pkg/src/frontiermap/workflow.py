"""Audited generation workflow over an evidence pack.

Node order: build pack, explain, audit, optional patch retrieve (bounded
by the iteration budget), ideate, score, blueprint, publish.  Every
hypothesis citation must resolve to a pack paper id; the discovery cue
is never citable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

from .embeddings import tokenize
from .pack import DiscoveryCue, EvidencePack, PackError, RetrievalBudget, build_pack, lexical_query_matches
from .snapshot import Snapshot, SnapshotStore
from .targets import TargetSpec

CUE_ALIGNMENT_GATE = 0.6  # below this mean item alignment, patch again

CRITERIA = ("importance", "novelty", "plausibility", "feasibility", "evaluability", "likely_impact")

BLUEPRINT_SECTIONS = (
    "materials",
    "synthesis_and_characterization",
    "in_vitro_plan",
    "in_vivo_plan",
    "risks",
    "mitigations",
    "success_criteria",
)


class WorkflowError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass(frozen=True)
class Explanation:
    side_summaries: tuple[str, ...]
    axes_of_separation: tuple[str, ...]
    bridge_seeds: tuple[str, ...]
    insufficient_evidence: bool
    citations: tuple[str, ...] = ()

    def to_payload(self) -> dict:
        return {
            "side_summaries": list(self.side_summaries),
            "axes_of_separation": list(self.axes_of_separation),
            "bridge_seeds": list(self.bridge_seeds),
            "insufficient_evidence": self.insufficient_evidence,
            "citations": list(self.citations),
        }


@dataclass(frozen=True)
class AuditReport:
    unsupported_claims: tuple[str, ...]
    missing_facets: tuple[str, ...]
    cue_violations: tuple[str, ...]
    patch_queries: tuple[str, ...]
    needs_patch: bool
    support_fraction: float

    def __post_init__(self) -> None:
        if self.needs_patch and not self.patch_queries:
            raise ValueError("needs_patch requires at least one patch query")
        if not 0.0 <= self.support_fraction <= 1.0:
            raise ValueError("support_fraction must be in [0, 1]")

    def to_payload(self) -> dict:
        return {
            "unsupported_claims": list(self.unsupported_claims),
            "missing_facets": list(self.missing_facets),
            "cue_violations": list(self.cue_violations),
            "patch_queries": list(self.patch_queries),
            "needs_patch": self.needs_patch,
            "support_fraction": self.support_fraction,
        }


@dataclass(frozen=True)
class Hypothesis:
    title: str
    body: str
    citations: tuple[str, ...]
    assumptions: tuple[str, ...] = ()

    def to_payload(self) -> dict:
        return {
            "title": self.title,
            "body": self.body,
            "citations": list(self.citations),
            "assumptions": list(self.assumptions),
        }


@dataclass(frozen=True)
class IdeaScores:
    importance: float
    novelty: float
    plausibility: float
    feasibility: float
    evaluability: float
    likely_impact: float
    scorer: str  # "judge" | "heuristic"

    def __post_init__(self) -> None:
        for name in CRITERIA:
            value = getattr(self, name)
            if not 1.0 <= value <= 5.0:
                raise ValueError(f"{name} score {value} outside [1, 5]")

    def mean(self) -> float:
        return sum(getattr(self, name) for name in CRITERIA) / len(CRITERIA)

    def to_payload(self) -> dict:
        out = {name: getattr(self, name) for name in CRITERIA}
        out["scorer"] = self.scorer
        return out


@dataclass(frozen=True)
class Blueprint:
    sections: dict  # section name -> text, all seven nonempty

    def __post_init__(self) -> None:
        for name in BLUEPRINT_SECTIONS:
            if not str(self.sections.get(name, "")).strip():
                raise ValueError(f"blueprint section {name} is empty")

    def to_payload(self) -> dict:
        return {name: self.sections[name] for name in BLUEPRINT_SECTIONS}


class Generator(Protocol):
    """Pluggable text generator.  ``judge`` may return None to request the
    heuristic scorer."""

    name: str

    def explain(self, pack: EvidencePack, snapshot: Snapshot) -> Explanation: ...

    def audit(self, explanation: Explanation, pack: EvidencePack) -> AuditReport: ...

    def ideate(
        self, pack: EvidencePack, explanation: Explanation, n: int, snapshot: Snapshot
    ) -> list[Hypothesis]: ...

    def judge(self, hypothesis: Hypothesis, pack: EvidencePack) -> Optional[IdeaScores]: ...

    def blueprint(self, hypothesis: Hypothesis, pack: EvidencePack) -> Blueprint: ...


@dataclass
class ResearchBrief:
    target: TargetSpec
    pack: EvidencePack
    explanation: Explanation
    audit: AuditReport
    hypotheses: list[Hypothesis]
    idea_scores: list[IdeaScores]
    blueprint: Blueprint
    blueprint_index: int
    iterations: int

    def to_payload(self) -> dict:
        return {
            "target": self.target.to_payload(),
            "pack": self.pack.to_payload(),
            "explanation": self.explanation.to_payload(),
            "audit": self.audit.to_payload(),
            "hypotheses": [h.to_payload() for h in self.hypotheses],
            "idea_scores": [s.to_payload() for s in self.idea_scores],
            "blueprint": self.blueprint.to_payload(),
            "blueprint_index": self.blueprint_index,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# Heuristic idea scorer
# ---------------------------------------------------------------------------

_SENTENCE_RE = re.compile(r"[^.!?]+[.!?]?")


def _token_jaccard(a: str, b: str) -> float:
    sa, sb = set(tokenize(a)), set(tokenize(b))
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def heuristic_scores(hypothesis: Hypothesis, pack: EvidencePack, snapshot: Snapshot) -> IdeaScores:
    """Deterministic fallback scorer: monotone in citation support density,
    uninformative prior of 3.0 on the judgment-heavy criteria."""
    citations = set(hypothesis.citations)
    evaluability = 1.0 + 4.0 * min(1.0, len(citations) / 5.0)
    sentences = [s for s in _SENTENCE_RE.findall(hypothesis.body) if s.strip()]
    if sentences:
        cited = sum(1 for s in sentences if any(c in s for c in citations))
        feasibility = 1.0 + 4.0 * (cited / len(sentences))
    else:
        feasibility = 1.0
    overlap = 0.0
    for pid in pack.paper_ids:
        overlap = max(overlap, _token_jaccard(hypothesis.body, snapshot.corpus.get(pid).abstract))
    novelty = 1.0 + 4.0 * (1.0 - overlap)
    return IdeaScores(
        importance=3.0,
        novelty=novelty,
        plausibility=3.0,
        feasibility=feasibility,
        evaluability=evaluability,
        likely_impact=3.0,
        scorer="heuristic",
    )


def score_ideas(
    hypotheses: Sequence[Hypothesis],
    pack: EvidencePack,
    snapshot: Snapshot,
    generator: Optional[Generator] = None,
) -> list[IdeaScores]:
    if not hypotheses:
        raise WorkflowError("score", "no hypotheses to score")
    out = []
    for hyp in hypotheses:
        scores = generator.judge(hyp, pack) if generator is not None else None
        out.append(scores if scores is not None else heuristic_scores(hyp, pack, snapshot))
    return out


def select_blueprint_idea(scores: Sequence[IdeaScores]) -> int:
    """Index of the top-scored hypothesis (mean of the six criteria),
    ties resolved toward the earlier hypothesis."""
    if not scores:
        raise WorkflowError("blueprint", "no scores")
    best, best_mean = 0, scores[0].mean()
    for i, s in enumerate(scores[1:], start=1):
        if s.mean() > best_mean:
            best, best_mean = i, s.mean()
    return best


# ---------------------------------------------------------------------------
# Patch retrieval
# ---------------------------------------------------------------------------


def patch_retrieve(
    pack: EvidencePack,
    audit: AuditReport,
    snapshot: Snapshot,
    cue: Optional[DiscoveryCue] = None,
    per_query: int = 4,
) -> EvidencePack:
    """Run each audit patch query through lexical retrieval (plus the cue
    channel when active) and merge new items; duplicates dropped, pack
    size never decreases."""
    if not audit.patch_queries:
        raise WorkflowError("patch_retrieve", "no patch queries")
    seen = set(pack.paper_ids)
    items = list(pack.items)
    issued = list(pack.queries)
    queries: list[tuple[str, str]] = [(q, "lexical_query") for q in audit.patch_queries]
    if cue is not None:
        queries.extend((k, "discovery_cue_query") for k in cue.keywords)
    for query, source in queries:
        issued.append(query)
        try:
            hits = lexical_query_matches(snapshot, query, per_query, source=source)
        except PackError:
            continue
        for item in hits:
            if item.paper_id not in seen:
                seen.add(item.paper_id)
                items.append(item)
    return EvidencePack(
        snapshot_id=pack.snapshot_id,
        target=pack.target,
        items=items,
        budget=pack.budget,
        cue=pack.cue,
        queries=tuple(issued),
    )


def _mean_cue_alignment(pack: EvidencePack) -> Optional[float]:
    values = [
        item.selection_meta["cue_alignment"]
        for item in pack.items
        if "cue_alignment" in item.selection_meta
    ]
    return sum(values) / len(values) if values else None


def _validate_hypotheses(hypotheses: Sequence[Hypothesis], pack: EvidencePack) -> Optional[str]:
    pack_ids = set(pack.paper_ids)
    for hyp in hypotheses:
        if not hyp.citations:
            return f"hypothesis '{hyp.title}' has no citations"
        for cite in hyp.citations:
            if cite not in pack_ids:
                return f"citation {cite} not in evidence pack"
    return None


def run_workflow(
    snapshot: Snapshot,
    target: TargetSpec,
    budget: RetrievalBudget,
    generator: Generator,
    cue: Optional[DiscoveryCue] = None,
    queries: Sequence[str] = (),
    max_iters: int = 2,
    n_ideas: int = 3,
    encoder=None,
    store: Optional[SnapshotStore] = None,
    cue_gate: float = CUE_ALIGNMENT_GATE,
) -> ResearchBrief:
    """Execute the full audited workflow and (optionally) publish the
    brief.  ``iterations`` counts explain/audit passes and never exceeds
    ``max_iters``."""
    if max_iters < 1:
        raise WorkflowError("config", "max_iters must be >= 1")
    if n_ideas < 1:
        raise WorkflowError("config", "n_ideas must be >= 1")
    try:
        pack = build_pack(snapshot, target, budget, cue=cue, queries=queries, encoder=encoder)
    except PackError as exc:
        raise WorkflowError("build_pack", str(exc)) from exc

    iterations = 0
    while True:
        try:
            explanation = generator.explain(pack, snapshot)
        except Exception as exc:
            raise WorkflowError("explain", str(exc)) from exc
        try:
            audit = generator.audit(explanation, pack)
        except Exception as exc:
            raise WorkflowError("audit", str(exc)) from exc
        iterations += 1
        alignment = _mean_cue_alignment(pack) if cue is not None else None
        weak_cue = alignment is not None and alignment < cue_gate
        if (audit.needs_patch or weak_cue) and iterations < max_iters and audit.patch_queries:
            pack = patch_retrieve(pack, audit, snapshot, cue=cue)
            continue
        break

    try:
        hypotheses = generator.ideate(pack, explanation, n_ideas, snapshot)
    except Exception as exc:
        raise WorkflowError("ideate", str(exc)) from exc
    problem = _validate_hypotheses(hypotheses, pack)
    if problem is not None:
        # one regeneration request, then hard error
        try:
            hypotheses = generator.ideate(pack, explanation, n_ideas, snapshot)
        except Exception as exc:
            raise WorkflowError("ideate", str(exc)) from exc
        problem = _validate_hypotheses(hypotheses, pack)
        if problem is not None:
            raise WorkflowError("ideate", f"grounding violation after regeneration: {problem}")

    idea_scores = score_ideas(hypotheses, pack, snapshot, generator)
    chosen = select_blueprint_idea(idea_scores)
    try:
        plan = generator.blueprint(hypotheses[chosen], pack)
    except Exception as exc:
        raise WorkflowError("blueprint", str(exc)) from exc

    brief = ResearchBrief(
        target=target,
        pack=pack,
        explanation=explanation,
        audit=audit,
        hypotheses=list(hypotheses),
        idea_scores=idea_scores,
        blueprint=plan,
        blueprint_index=chosen,
        iterations=iterations,
    )
    if store is not None:
        store.store_brief(snapshot.snapshot_id, brief.to_payload())
    return brief
