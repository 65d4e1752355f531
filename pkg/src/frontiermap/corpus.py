"""Corpus ingestion, date imputation, and temporal splitting.

Input is newline-delimited UTF-8 records, one document per line, with
fields ``paper_id``, ``title``, ``abstract``, ``doi``, ``keywords``,
``subject_labels``, ``language``, ``year``, ``month``, ``day``.  The
document text used everywhere downstream is exactly ``title + " " +
abstract``.
"""

from __future__ import annotations

import calendar
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Iterator, Optional


class CorpusError(ValueError):
    """Raised for unusable corpus-level inputs (e.g. empty historical side)."""


@dataclass(frozen=True)
class DateParts:
    """Partially known publication date. Year is mandatory; a day without
    a month is invalid."""

    year: int
    month: Optional[int] = None
    day: Optional[int] = None

    def __post_init__(self) -> None:
        if self.day is not None and self.month is None:
            raise ValueError("day given without month")
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"invalid month: {self.month}")
        if self.day is not None and not 1 <= self.day <= 31:
            raise ValueError(f"invalid day: {self.day}")


def impute_date(parts: DateParts) -> date:
    """Resolve partial date parts to a full calendar date, conservatively.

    Missing components are imputed to the last day of the most specific
    known period: year only -> December 31; year+month -> last day of
    that month; full dates pass through unchanged.  This guarantees an
    uncertain record can never resolve earlier than any date consistent
    with its parts, so it cannot leak into a historical split.
    """
    if parts.month is None:
        return date(parts.year, 12, 31)
    if parts.day is None:
        last = calendar.monthrange(parts.year, parts.month)[1]
        return date(parts.year, parts.month, last)
    try:
        return date(parts.year, parts.month, parts.day)
    except ValueError as exc:
        raise ValueError(f"invalid day: {parts.day}") from exc


@dataclass(frozen=True)
class PaperRecord:
    paper_id: str
    title: str
    abstract: str = ""
    doi: Optional[str] = None
    keywords: tuple[str, ...] = ()
    subject_labels: tuple[str, ...] = ()
    language: Optional[str] = None
    date_parts: DateParts = field(default_factory=lambda: DateParts(1970))
    resolved_date: date = date(1970, 12, 31)

    @property
    def text(self) -> str:
        """Canonical document text: title and abstract joined by one space."""
        return f"{self.title} {self.abstract}"


def _normalize_labels(raw: object) -> tuple[str, ...]:
    """Lower-case and de-duplicate subject labels, preserving first-seen order."""
    if not isinstance(raw, (list, tuple)):
        return ()
    seen: dict[str, None] = {}
    for item in raw:
        label = str(item).strip().lower()
        if label and label not in seen:
            seen[label] = None
    return tuple(seen)


@dataclass(frozen=True)
class CorpusSplit:
    cutoff: date
    window_end: date
    historical_ids: tuple[str, ...]
    future_ids: tuple[str, ...]
    excluded_ids: tuple[str, ...] = ()


class Corpus:
    """Immutable, insertion-ordered collection of deduplicated records."""

    def __init__(self, records: Iterable[PaperRecord]):
        self._records: list[PaperRecord] = []
        self._by_id: dict[str, PaperRecord] = {}
        for rec in records:
            if rec.paper_id in self._by_id:
                raise ValueError(f"duplicate paper_id: {rec.paper_id}")
            self._by_id[rec.paper_id] = rec
            self._records.append(rec)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self._records)

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._by_id

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.paper_id for r in self._records)

    def get(self, paper_id: str) -> PaperRecord:
        return self._by_id[paper_id]

    def texts(self) -> list[str]:
        return [r.text for r in self._records]

    def subset(self, ids: Iterable[str]) -> "Corpus":
        return Corpus(self._by_id[i] for i in ids)


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, index: int, reason: str) -> None:
        self.rejected.append((index, reason))


def parse_record(raw: dict) -> PaperRecord:
    """Build a PaperRecord from one raw mapping.  Raises ValueError with a
    field-naming message on contract violations."""
    paper_id = str(raw.get("paper_id") or "").strip()
    if not paper_id:
        raise ValueError("missing paper_id")
    title = str(raw.get("title") or "").strip()
    if not title:
        raise ValueError("missing or empty title")
    if raw.get("year") is None:
        raise ValueError("missing year")
    parts = DateParts(
        year=int(raw["year"]),
        month=int(raw["month"]) if raw.get("month") is not None else None,
        day=int(raw["day"]) if raw.get("day") is not None else None,
    )
    keywords = tuple(str(k) for k in raw.get("keywords") or ())
    return PaperRecord(
        paper_id=paper_id,
        title=title,
        abstract=str(raw.get("abstract") or ""),
        doi=raw.get("doi") or None,
        keywords=keywords,
        subject_labels=_normalize_labels(raw.get("subject_labels")),
        language=raw.get("language") or None,
        date_parts=parts,
        resolved_date=impute_date(parts),
    )


def ingest_records(raw_records: Iterable[dict]) -> tuple[Corpus, IngestReport]:
    """Ingest raw mappings into a deduplicated corpus.

    Records missing id/title/year, carrying invalid dates, or repeating
    an already-seen id are rejected with a per-record diagnostic; the
    rest are kept in stable insertion order.
    """
    report = IngestReport()
    records: list[PaperRecord] = []
    seen: set[str] = set()
    for index, raw in enumerate(raw_records):
        try:
            rec = parse_record(raw)
        except (ValueError, TypeError) as exc:
            report.reject(index, str(exc))
            continue
        if rec.paper_id in seen:
            report.reject(index, f"duplicate paper_id: {rec.paper_id}")
            continue
        seen.add(rec.paper_id)
        records.append(rec)
    report.accepted = len(records)
    return Corpus(records), report


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def record_to_dict(rec: PaperRecord) -> dict:
    return {
        "paper_id": rec.paper_id,
        "title": rec.title,
        "abstract": rec.abstract,
        "doi": rec.doi,
        "keywords": list(rec.keywords),
        "subject_labels": list(rec.subject_labels),
        "language": rec.language,
        "year": rec.date_parts.year,
        "month": rec.date_parts.month,
        "day": rec.date_parts.day,
    }


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in corpus:
            fh.write(json.dumps(record_to_dict(rec), ensure_ascii=False) + "\n")


def load_corpus(path: str | Path) -> tuple[Corpus, IngestReport]:
    return ingest_records(read_jsonl(path))


def temporal_split(corpus: Corpus, cutoff: date, window_end: date) -> CorpusSplit:
    """Partition the corpus at ``cutoff`` (inclusive on the historical side).

    Papers dated strictly after ``window_end`` are excluded from both
    sides; they stay in the corpus but take no part in the benchmark.
    """
    if cutoff >= window_end:
        raise CorpusError("cutoff must precede window_end")
    historical: list[str] = []
    future: list[str] = []
    excluded: list[str] = []
    for rec in corpus:
        if rec.resolved_date <= cutoff:
            historical.append(rec.paper_id)
        elif rec.resolved_date <= window_end:
            future.append(rec.paper_id)
        else:
            excluded.append(rec.paper_id)
    if not historical:
        raise CorpusError("empty historical side: nothing to analyze")
    return CorpusSplit(
        cutoff=cutoff,
        window_end=window_end,
        historical_ids=tuple(historical),
        future_ids=tuple(future),
        excluded_ids=tuple(excluded),
    )
