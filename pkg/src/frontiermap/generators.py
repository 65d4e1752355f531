"""Generator backends: the deterministic mock used for tests and offline
runs, and a thin HTTP client for a chat-completion-style service with
structured outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import httpx

from .pack import EvidencePack
from .snapshot import Snapshot
from .workflow import (
    AuditReport,
    Blueprint,
    BLUEPRINT_SECTIONS,
    Explanation,
    Hypothesis,
    IdeaScores,
    WorkflowError,
)


@dataclass
class MockGenerator:
    """Deterministic offline generator: every output is a pure function of
    the pack contents and the configured knobs."""

    name: str = "mock"
    needs_patch_plan: tuple[bool, ...] = (False,)
    support_fraction: float = 0.92
    patch_queries: tuple[str, ...] = ()
    insufficient_evidence: bool = False
    emit_invalid_citation: bool = False
    judge_scores: Optional[IdeaScores] = None
    citations_per_idea: int = 5
    _audit_calls: int = field(default=0, repr=False)

    def reset(self) -> None:
        self._audit_calls = 0

    def _titles(self, pack: EvidencePack, snapshot: Snapshot) -> list[str]:
        return [snapshot.corpus.get(pid).title for pid in pack.paper_ids]

    def explain(self, pack: EvidencePack, snapshot: Snapshot) -> Explanation:
        titles = self._titles(pack, snapshot)
        head, tail = titles[0], titles[-1]
        cited = tuple(pack.paper_ids[:2])
        return Explanation(
            side_summaries=(
                f"One side centers on: {head}",
                f"The other side centers on: {tail}",
            ),
            axes_of_separation=("vocabulary", "experimental context"),
            bridge_seeds=(f"combine {head.split()[0].lower()} with {tail.split()[-1].lower()}",),
            insufficient_evidence=self.insufficient_evidence,
            citations=cited,
        )

    def _derived_patch_queries(self, pack: EvidencePack, snapshot: Snapshot) -> tuple[str, ...]:
        if self.patch_queries:
            return self.patch_queries
        words = []
        for title in self._titles(pack, snapshot)[:2]:
            words.extend(title.split()[:2])
        return (" ".join(words),) if words else ("evidence",)

    def audit(self, explanation: Explanation, pack: EvidencePack) -> AuditReport:
        plan = self.needs_patch_plan
        step = min(self._audit_calls, len(plan) - 1)
        self._audit_calls += 1
        needs = bool(plan[step])
        queries = self.patch_queries or ("supplementary evidence",)
        return AuditReport(
            unsupported_claims=() if not needs else ("bridge mechanism is asserted, not shown",),
            missing_facets=() if not needs else ("direct evidence for the bridging step",),
            cue_violations=(),
            patch_queries=queries if needs else queries,
            needs_patch=needs,
            support_fraction=self.support_fraction,
        )

    def ideate(
        self, pack: EvidencePack, explanation: Explanation, n: int, snapshot: Snapshot
    ) -> list[Hypothesis]:
        ids = pack.paper_ids
        count = min(self.citations_per_idea, len(ids))
        hypotheses = []
        for i in range(n):
            if len(ids) == 1:
                chosen = [ids[0]]
            else:
                # spread citations across the whole pack, shifted per idea
                positions = [
                    (i + round(j * (len(ids) - 1) / max(1, count - 1))) % len(ids)
                    for j in range(count)
                ]
                chosen = []
                for p in positions:
                    if ids[p] not in chosen:
                        chosen.append(ids[p])
            if self.emit_invalid_citation:
                chosen = [*chosen, "paper-not-in-pack"]
            sentences = [
                f"{snapshot.corpus.get(pid).title} [{pid}]." for pid in chosen if pid in snapshot.corpus
            ]
            first = snapshot.corpus.get(chosen[0]).title if chosen[0] in snapshot.corpus else "evidence"
            bridge = f"Bridging these strands suggests a joint direction building on {first}."
            hypotheses.append(
                Hypothesis(
                    title=f"Bridge hypothesis {i + 1} for {pack.target.key()}",
                    body=" ".join([*sentences, bridge]),
                    citations=tuple(chosen),
                    assumptions=("transfer across contexts is assumed, not demonstrated",),
                )
            )
        return hypotheses

    def judge(self, hypothesis: Hypothesis, pack: EvidencePack) -> Optional[IdeaScores]:
        return self.judge_scores

    def blueprint(self, hypothesis: Hypothesis, pack: EvidencePack) -> Blueprint:
        base = hypothesis.title
        return Blueprint(
            sections={
                "materials": f"Materials required to test: {base}",
                "synthesis_and_characterization": "Prepare and characterize the bridging system.",
                "in_vitro_plan": "Cell-level validation of the proposed mechanism.",
                "in_vivo_plan": "Small-animal study of the lead formulation.",
                "risks": "Evidence base is abstract-level; transfer may fail.",
                "mitigations": "Stage the work; gate on in vitro results.",
                "success_criteria": "Pre-registered effect size on the primary readout.",
            }
        )


class HttpGenerator:
    """Client for a chat-completion-style endpoint returning the structured
    payloads directly.  Base URL, model, and timeouts come from config."""

    def __init__(
        self,
        base_url: str,
        model: str = "default",
        timeout: float = 60.0,
        client: Optional[httpx.Client] = None,
        name: str = "http",
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.name = name
        self._client = client or httpx.Client(timeout=timeout)

    def _call(self, stage: str, payload: dict) -> dict:
        try:
            resp = self._client.post(
                f"{self.base_url}/generate",
                json={"stage": stage, "model": self.model, "payload": payload},
            )
            resp.raise_for_status()
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            raise WorkflowError(stage, f"generator backend failed: {exc}") from exc
        return resp.json()

    def explain(self, pack: EvidencePack, snapshot: Snapshot) -> Explanation:
        data = self._call("explain", {"pack": pack.to_payload()})
        return Explanation(
            side_summaries=tuple(data["side_summaries"]),
            axes_of_separation=tuple(data["axes_of_separation"]),
            bridge_seeds=tuple(data["bridge_seeds"]),
            insufficient_evidence=bool(data["insufficient_evidence"]),
            citations=tuple(data.get("citations", ())),
        )

    def audit(self, explanation: Explanation, pack: EvidencePack) -> AuditReport:
        data = self._call(
            "audit", {"explanation": explanation.to_payload(), "pack": pack.to_payload()}
        )
        return AuditReport(
            unsupported_claims=tuple(data.get("unsupported_claims", ())),
            missing_facets=tuple(data.get("missing_facets", ())),
            cue_violations=tuple(data.get("cue_violations", ())),
            patch_queries=tuple(data.get("patch_queries", ())),
            needs_patch=bool(data["needs_patch"]),
            support_fraction=float(data["support_fraction"]),
        )

    def ideate(
        self, pack: EvidencePack, explanation: Explanation, n: int, snapshot: Snapshot
    ) -> list[Hypothesis]:
        data = self._call(
            "ideate",
            {"pack": pack.to_payload(), "explanation": explanation.to_payload(), "n": n},
        )
        return [
            Hypothesis(
                title=h["title"],
                body=h["body"],
                citations=tuple(h.get("citations", ())),
                assumptions=tuple(h.get("assumptions", ())),
            )
            for h in data["hypotheses"]
        ]

    def judge(self, hypothesis: Hypothesis, pack: EvidencePack) -> Optional[IdeaScores]:
        data = self._call(
            "judge", {"hypothesis": hypothesis.to_payload(), "pack": pack.to_payload()}
        )
        if not data.get("scores"):
            return None
        s = data["scores"]
        return IdeaScores(
            importance=float(s["importance"]),
            novelty=float(s["novelty"]),
            plausibility=float(s["plausibility"]),
            feasibility=float(s["feasibility"]),
            evaluability=float(s["evaluability"]),
            likely_impact=float(s["likely_impact"]),
            scorer="judge",
        )

    def blueprint(self, hypothesis: Hypothesis, pack: EvidencePack) -> Blueprint:
        data = self._call(
            "blueprint", {"hypothesis": hypothesis.to_payload(), "pack": pack.to_payload()}
        )
        return Blueprint(sections={name: data["sections"][name] for name in BLUEPRINT_SECTIONS})
