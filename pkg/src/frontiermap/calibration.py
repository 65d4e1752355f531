"""Score calibration against human reviews, label-based retrieval
evaluation, and blind review packet export.

Correlation statistics are undefined (None), not zero, when either side
has zero variance.  Retrieval evaluation uses shared curated labels as
graded relevance with a log2 rank discount.
"""

from __future__ import annotations

import json
import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .corpus import Corpus
from .workflow import CRITERIA

RETRIEVAL_CUTOFF = 10


class CalibrationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Reviewer aggregation and correlation
# ---------------------------------------------------------------------------


def aggregate_reviewers(reviews: Sequence[dict]) -> dict:
    """Per-hypothesis, per-criterion means over the reviewers who scored
    that criterion; absent entries are skipped, never treated as zero.

    Each review is {"hypothesis_id": ..., "reviewer": ..., "scores":
    {criterion: value, ...}}.
    """
    buckets: dict[str, dict[str, list[float]]] = {}
    for review in reviews:
        hyp = str(review["hypothesis_id"])
        per = buckets.setdefault(hyp, {})
        for criterion, value in review.get("scores", {}).items():
            if value is None:
                continue
            per.setdefault(criterion, []).append(float(value))
    out = {}
    for hyp, per in buckets.items():
        means = {c: sum(v) / len(v) for c, v in per.items()}
        all_values = [x for v in per.values() for x in v]
        means["overall"] = sum(all_values) / len(all_values) if all_values else float("nan")
        out[hyp] = means
    return out


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if len(x) != len(y):
        raise CalibrationError("length mismatch")
    if len(x) < 2:
        return None
    a, b = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    sa, sb = a.std(), b.std()
    if sa == 0.0 or sb == 0.0:
        return None
    return float(((a - a.mean()) * (b - b.mean())).mean() / (sa * sb))


def average_ranks(values: Sequence[float]) -> list[float]:
    """One-indexed ranks; tied values share the average of their ranks."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    return pearson(average_ranks(x), average_ranks(y))


@dataclass(frozen=True)
class CalibrationStats:
    n: int
    pearson_r: Optional[float]
    spearman_rho: Optional[float]
    mean_difference: float  # mean(auto - human)

    def to_payload(self) -> dict:
        return {
            "n": self.n,
            "pearson_r": self.pearson_r,
            "spearman_rho": self.spearman_rho,
            "mean_difference": self.mean_difference,
        }


def calibration_stats(auto_scores: Sequence[float], human_scores: Sequence[float]) -> CalibrationStats:
    if len(auto_scores) != len(human_scores):
        raise CalibrationError("paired score lists must have equal length")
    if not auto_scores:
        raise CalibrationError("no paired scores")
    diffs = [a - h for a, h in zip(auto_scores, human_scores)]
    return CalibrationStats(
        n=len(auto_scores),
        pearson_r=pearson(auto_scores, human_scores),
        spearman_rho=spearman(auto_scores, human_scores),
        mean_difference=sum(diffs) / len(diffs),
    )


# ---------------------------------------------------------------------------
# Label-based retrieval evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RetrievalEvalReport:
    n_queries_sampled: int
    n_queries_scored: int  # queries with at least one relevant candidate
    mrr: float
    precision_at_10: float
    map_at_10: float
    ndcg_at_10: float
    mean_shared_labels_at_10: float

    def to_payload(self) -> dict:
        return {
            "n_queries_sampled": self.n_queries_sampled,
            "n_queries_scored": self.n_queries_scored,
            "mrr": self.mrr,
            "precision_at_10": self.precision_at_10,
            "map_at_10": self.map_at_10,
            "ndcg_at_10": self.ndcg_at_10,
            "mean_shared_labels_at_10": self.mean_shared_labels_at_10,
        }


def filter_labels(corpus: Corpus, min_frequency: int = 5) -> set[str]:
    """Labels occurring on at least ``min_frequency`` papers."""
    counts = Counter(label for rec in corpus for label in rec.subject_labels)
    return {label for label, c in counts.items() if c >= min_frequency}


def _dcg(gains: Sequence[float]) -> float:
    return sum(g / math.log2(i + 2) for i, g in enumerate(gains))


def retrieval_eval(
    corpus: Corpus,
    vectors: np.ndarray,
    n_queries: int = 200,
    seed: int = 42,
    min_label_frequency: int = 5,
    cutoff: int = RETRIEVAL_CUTOFF,
) -> RetrievalEvalReport:
    """Evaluate nearest-neighbor retrieval against curated labels.

    Queries are sampled with a seeded RNG from papers carrying at least
    one filtered label.  A candidate is relevant when it shares a
    filtered label with the query; nDCG gain is the shared-label count.
    Queries with zero relevant candidates are excluded from the metric
    means but reported in the sampled count.
    """
    if len(corpus) != vectors.shape[0]:
        raise CalibrationError("corpus and vectors are misaligned")
    kept = filter_labels(corpus, min_label_frequency)
    label_sets = [set(rec.subject_labels) & kept for rec in corpus]
    eligible = [i for i, labels in enumerate(label_sets) if labels]
    if not eligible:
        raise CalibrationError("no papers carry a filtered label")
    rng = random.Random(seed)
    queries = sorted(rng.sample(eligible, min(n_queries, len(eligible))))

    norms = np.linalg.norm(vectors, axis=1)
    ids = corpus.ids
    rr, p10, ap10, ndcg10, shared10 = [], [], [], [], []
    for q in queries:
        shared = np.array(
            [len(label_sets[q] & label_sets[i]) if i != q else 0 for i in range(len(corpus))]
        )
        if not np.any(shared > 0):
            continue
        cos = vectors @ vectors[q] / (norms * norms[q])
        cos[q] = -np.inf
        order = [i for i in np.lexsort((np.array(ids), -cos)) if i != q]
        ranked_shared = shared[order]
        relevant = ranked_shared > 0
        first = int(np.argmax(relevant))
        rr.append(1.0 / (first + 1))
        top = relevant[:cutoff]
        p10.append(float(top.sum()) / cutoff)
        hits, precisions = 0, []
        for i in range(len(top)):
            if top[i]:
                hits += 1
                precisions.append(hits / (i + 1))
        total_relevant = int(relevant.sum())
        ap10.append(sum(precisions) / min(cutoff, total_relevant))
        gains = ranked_shared[:cutoff].astype(float)
        ideal = np.sort(ranked_shared.astype(float))[::-1][:cutoff]
        idcg = _dcg(ideal)
        ndcg10.append(_dcg(gains) / idcg if idcg > 0 else 0.0)
        shared10.append(float(ranked_shared[:cutoff].mean()))

    if not rr:
        raise CalibrationError("every sampled query had zero relevant candidates")
    mean = lambda xs: sum(xs) / len(xs)
    return RetrievalEvalReport(
        n_queries_sampled=len(queries),
        n_queries_scored=len(rr),
        mrr=mean(rr),
        precision_at_10=mean(p10),
        map_at_10=mean(ap10),
        ndcg_at_10=mean(ndcg10),
        mean_shared_labels_at_10=mean(shared10),
    )


# ---------------------------------------------------------------------------
# Blind review packets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReviewPacket:
    packet_id: str
    open_section: dict  # shown to reviewers: hypothesis text + evidence
    sealed_section: dict  # provenance revealed only after scoring

    def to_payload(self) -> dict:
        return {
            "packet_id": self.packet_id,
            "open_section": self.open_section,
            "sealed_section": self.sealed_section,
        }


def check_blindness(packet: ReviewPacket, forbidden_tokens: Sequence[str]) -> list[str]:
    """Byte-scan the serialized open section for provenance leaks; returns
    the offending tokens (case-insensitive)."""
    blob = json.dumps(packet.open_section, sort_keys=True).lower()
    return [t for t in forbidden_tokens if t.lower() in blob]


def export_review_packets(
    entries: Sequence[dict],
    forbidden_tokens: Sequence[str] = (),
) -> list[ReviewPacket]:
    """Build packets from {"packet_id", "hypothesis", "evidence",
    "provenance"} entries.  The provenance dict (method, generator,
    scores) goes into the sealed section only; export fails when any
    forbidden token appears in an open section."""
    packets = []
    for entry in entries:
        hyp = entry["hypothesis"]
        packet = ReviewPacket(
            packet_id=str(entry["packet_id"]),
            open_section={
                "title": hyp["title"],
                "body": hyp["body"],
                "citations": list(hyp.get("citations", ())),
                "assumptions": list(hyp.get("assumptions", ())),
                "evidence": list(entry.get("evidence", ())),
                "criteria": list(CRITERIA),
            },
            sealed_section=dict(entry.get("provenance", {})),
        )
        leaks = check_blindness(packet, forbidden_tokens)
        if leaks:
            raise CalibrationError(
                f"packet {packet.packet_id} leaks provenance tokens: {leaks}"
            )
        packets.append(packet)
    return packets
