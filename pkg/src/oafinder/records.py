"""Bibliographic data model: article records, citation-range bins, detection
evidence, and JSONL persistence.

Titles and author names are stored verbatim; any normalization (casefolding,
whitespace collapsing) happens in the matcher so that evidence offsets keep
referring to source text.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, asdict
from typing import Iterable, Optional


class OAStatus(enum.Enum):
    OA = "OA"
    NOA = "NOA"
    UNKNOWN = "UNKNOWN"


class CitationRange(enum.Enum):
    """The six citation bins: 0, 1, 2-3, 4-7, 8-15, 16+."""

    R0 = "0"
    R1 = "1"
    R2_3 = "2-3"
    R4_7 = "4-7"
    R8_15 = "8-15"
    R16_PLUS = "16+"


# Ordered for stable report output.
ALL_RANGES = (
    CitationRange.R0,
    CitationRange.R1,
    CitationRange.R2_3,
    CitationRange.R4_7,
    CitationRange.R8_15,
    CitationRange.R16_PLUS,
)


def bin_citations(c: int) -> CitationRange:
    """Map a non-negative citation count to its bin.

    Total on non-negative integers; raises ValueError on negative input.
    """
    if c < 0:
        raise ValueError(f"citation count must be non-negative, got {c}")
    if c == 0:
        return CitationRange.R0
    if c == 1:
        return CitationRange.R1
    if c <= 3:
        return CitationRange.R2_3
    if c <= 7:
        return CitationRange.R4_7
    if c <= 15:
        return CitationRange.R8_15
    return CitationRange.R16_PLUS


class ValidationError(ValueError):
    """A record violates one of the schema invariants."""


class ParseError(ValueError):
    """A persistence file line could not be parsed."""


def make_issue_key(journal_id: str, year: int, issue: int | str) -> str:
    """Composite sortable key "journal_id|year|issue"; "|" is forbidden in parts."""
    if "|" in journal_id or "|" in str(issue):
        raise ValidationError("'|' is not allowed in issue key components")
    return f"{journal_id}|{year}|{issue}"


@dataclass(frozen=True)
class ArticleRecord:
    """One bibliographic record with citation count and OA status."""

    id: str
    first_author_surname: str
    title: str
    journal_id: str
    issue_key: str
    year: int
    discipline: str
    country: str
    citation_count: int
    oa_status: OAStatus = OAStatus.UNKNOWN

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("record has empty id")
        if self.citation_count < 0:
            raise ValidationError(
                f"record {self.id}: citation_count must be >= 0, "
                f"got {self.citation_count}"
            )
        if not self.title.strip():
            raise ValidationError(f"record {self.id}: title is empty")
        if not self.first_author_surname.strip():
            raise ValidationError(f"record {self.id}: first_author_surname is empty")
        parts = self.issue_key.split("|")
        if len(parts) != 3 or parts[0] != self.journal_id or parts[1] != str(self.year):
            raise ValidationError(
                f"record {self.id}: issue_key {self.issue_key!r} is not "
                f"'{self.journal_id}|{self.year}|<issue>'"
            )

    @property
    def citation_range(self) -> CitationRange:
        return bin_citations(self.citation_count)


class Verdict(enum.Enum):
    OA = "OA"
    NOA = "NOA"


@dataclass(frozen=True)
class DetectionEvidence:
    """The robot's decision for one article plus what justifies it."""

    article_id: str
    verdict: Verdict
    url: Optional[str] = None
    match_head_offset: Optional[int] = None
    match_tail_marker: Optional[str] = None
    reason: Optional[str] = None  # set for NOA verdicts
    depth: int = 0
    timestamp: float = 0.0
    low_confidence: bool = False

    def validate(self) -> None:
        if self.verdict is Verdict.OA and not self.url:
            raise ValidationError(
                f"evidence for {self.article_id}: OA verdict requires a url"
            )
        if self.depth < 0:
            raise ValidationError(f"evidence for {self.article_id}: negative depth")


def _record_from_dict(obj: dict) -> ArticleRecord:
    try:
        rec = ArticleRecord(
            id=obj["id"],
            first_author_surname=obj["first_author_surname"],
            title=obj["title"],
            journal_id=obj["journal_id"],
            issue_key=obj["issue_key"],
            year=int(obj["year"]),
            discipline=obj["discipline"],
            country=obj["country"],
            citation_count=int(obj["citation_count"]),
            oa_status=OAStatus(obj.get("oa_status", "UNKNOWN")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad record object: {exc}") from exc
    rec.validate()
    return rec


def load_records(path) -> list[ArticleRecord]:
    """Load and validate a JSONL records file, one object per line.

    Errors carry the 1-based line number of the offending line.
    """
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                records.append(_record_from_dict(obj))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return records


def save_records(records: Iterable[ArticleRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = asdict(rec)
            obj["oa_status"] = rec.oa_status.value
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def save_detections(evidence: Iterable[DetectionEvidence], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in evidence:
            fh.write(detection_to_json(ev) + "\n")


def detection_to_json(ev: DetectionEvidence) -> str:
    obj = asdict(ev)
    obj["verdict"] = ev.verdict.value
    return json.dumps(obj, ensure_ascii=False, sort_keys=True)


def detection_from_dict(obj: dict) -> DetectionEvidence:
    try:
        ev = DetectionEvidence(
            article_id=obj["article_id"],
            verdict=Verdict(obj["verdict"]),
            url=obj.get("url"),
            match_head_offset=obj.get("match_head_offset"),
            match_tail_marker=obj.get("match_tail_marker"),
            reason=obj.get("reason"),
            depth=int(obj.get("depth", 0)),
            timestamp=float(obj.get("timestamp", 0.0)),
            low_confidence=bool(obj.get("low_confidence", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad detection object: {exc}") from exc
    ev.validate()
    return ev


def load_detections(path) -> list[DetectionEvidence]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                out.append(detection_from_dict(obj))
            except (ParseError, ValidationError) as exc:
                raise type(exc)(f"{path}:{lineno}: {exc}") from exc
    return out


def apply_detections(
    records: Iterable[ArticleRecord], detections: Iterable[DetectionEvidence]
) -> list[ArticleRecord]:
    """Return records with oa_status set from detection verdicts (by article id).

    Records with no detection keep their current status.
    """
    verdicts = {ev.article_id: ev.verdict for ev in detections}
    out = []
    for rec in records:
        v = verdicts.get(rec.id)
        if v is None:
            out.append(rec)
        else:
            out.append(
                ArticleRecord(
                    **{
                        **asdict(rec),
                        "oa_status": OAStatus.OA if v is Verdict.OA else OAStatus.NOA,
                    }
                )
            )
    return out
