"""Knowledge records: three tiers, lineage links, perspective normalization."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

from ..errors import DanglingLineage, MalformedEntry

logger = logging.getLogger(__name__)


class Tier(enum.Enum):
    TACTIC = "tactic"
    TECHNIQUE = "technique"
    ACTION = "action"


TIER_ORDER = {Tier.TACTIC: 0, Tier.TECHNIQUE: 1, Tier.ACTION: 2}


class Source(enum.Enum):
    ATTACK_MATRIX = "attack_matrix"
    TESTING_GUIDE = "testing_guide"
    CUSTOM = "custom"


class Perspective(enum.Enum):
    ADVERSARY = "adversary"
    PENTESTER = "pentester"


@dataclass(frozen=True)
class KnowledgeRecord:
    tier: Tier
    record_id: str
    name: str
    description: str
    lineage: tuple[str, ...]
    source: Source = Source.CUSTOM
    perspective: Perspective = Perspective.PENTESTER

    def __post_init__(self):
        if not self.record_id:
            raise ValueError("record_id must be non-empty")
        expected = TIER_ORDER[self.tier]
        if len(self.lineage) != expected:
            raise ValueError(
                f"{self.tier.value} {self.record_id} needs lineage of length "
                f"{expected}, got {len(self.lineage)}"
            )

    def to_json(self) -> dict[str, Any]:
        return {
            "tier": self.tier.value,
            "id": self.record_id,
            "name": self.name,
            "description": self.description,
            "lineage": list(self.lineage),
            "source": self.source.value,
            "perspective": self.perspective.value,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "KnowledgeRecord":
        return cls(
            tier=Tier(doc["tier"]),
            record_id=doc["id"],
            name=doc.get("name", ""),
            description=doc.get("description", ""),
            lineage=tuple(doc.get("lineage", [])),
            source=Source(doc.get("source", "custom")),
            perspective=Perspective(doc.get("perspective", "pentester")),
        )


@dataclass
class IngestReport:
    records: list[KnowledgeRecord]
    rejected: list[tuple[dict[str, Any], Exception]]

    @property
    def ok(self) -> bool:
        return not self.rejected


def _default_perspective(source: Source) -> Perspective:
    return Perspective.ADVERSARY if source is Source.ATTACK_MATRIX else Perspective.PENTESTER


def ingest_records(entries: Iterable[dict[str, Any]],
                   known: Optional[dict[str, KnowledgeRecord]] = None) -> IngestReport:
    """Validate raw entries into records, resolving parent links into lineage.

    Parents may live either in the same batch or in ``known`` (an existing
    store's records). Bad entries are collected, not raised; the caller
    decides whether a partial ingest is acceptable.
    """
    known = known or {}
    rejected: list[tuple[dict[str, Any], Exception]] = []
    staged: dict[str, dict[str, Any]] = {}
    order: list[str] = []

    for entry in entries:
        if not isinstance(entry, dict):
            rejected.append(({"entry": repr(entry)}, MalformedEntry("entry is not an object")))
            continue
        tier_s = entry.get("tier")
        rid = entry.get("id")
        if not rid or not isinstance(rid, str):
            rejected.append((entry, MalformedEntry("missing or non-string id")))
            continue
        try:
            tier = Tier(tier_s)
        except ValueError:
            rejected.append((entry, MalformedEntry(f"{rid}: unknown tier {tier_s!r}")))
            continue
        try:
            source = Source(entry.get("source", "custom"))
        except ValueError:
            rejected.append((entry, MalformedEntry(f"{rid}: unknown source {entry.get('source')!r}")))
            continue
        persp_raw = entry.get("perspective")
        try:
            perspective = Perspective(persp_raw) if persp_raw else _default_perspective(source)
        except ValueError:
            rejected.append((entry, MalformedEntry(f"{rid}: unknown perspective {persp_raw!r}")))
            continue
        parent = entry.get("parent")
        if tier is Tier.TACTIC and parent:
            rejected.append((entry, MalformedEntry(f"{rid}: a tactic cannot declare a parent")))
            continue
        if tier is not Tier.TACTIC and not parent:
            rejected.append((entry, MalformedEntry(f"{rid}: {tier.value} must declare a parent")))
            continue
        if rid in staged:
            prev = staged[rid]
            if prev["tier"] is not tier:
                rejected.append((entry, MalformedEntry(
                    f"{rid}: duplicate id with conflicting tier "
                    f"({prev['tier'].value} vs {tier.value})")))
                continue
            # same-tier duplicate: later fields win
            prev.update(name=entry.get("name", prev["name"]),
                        description=entry.get("description", prev["description"]),
                        parent=parent or prev["parent"], source=source,
                        perspective=perspective)
            continue
        staged[rid] = {
            "tier": tier, "name": entry.get("name", ""),
            "description": entry.get("description", ""),
            "parent": parent, "source": source, "perspective": perspective,
            "entry": entry,
        }
        order.append(rid)

    def resolve_tier(rid: str) -> Optional[Tier]:
        if rid in staged:
            return staged[rid]["tier"]
        if rid in known:
            return known[rid].tier
        return None

    def tactic_of_technique(tid: str) -> Optional[str]:
        if tid in staged:
            return staged[tid]["parent"]
        if tid in known:
            return known[tid].lineage[0] if known[tid].lineage else None
        return None

    records: list[KnowledgeRecord] = []
    for rid in order:
        item = staged[rid]
        tier, parent = item["tier"], item["parent"]
        lineage: tuple[str, ...] = ()
        try:
            if tier is Tier.TECHNIQUE:
                if resolve_tier(parent) is not Tier.TACTIC:
                    raise DanglingLineage(f"{rid}: parent tactic {parent!r} not found")
                lineage = (parent,)
            elif tier is Tier.ACTION:
                if resolve_tier(parent) is not Tier.TECHNIQUE:
                    raise DanglingLineage(f"{rid}: parent technique {parent!r} not found")
                tac = tactic_of_technique(parent)
                if tac is None or resolve_tier(tac) is not Tier.TACTIC:
                    raise DanglingLineage(f"{rid}: technique {parent!r} has no resolvable tactic")
                lineage = (tac, parent)
        except DanglingLineage as exc:
            rejected.append((item["entry"], exc))
            continue
        records.append(KnowledgeRecord(
            tier=tier, record_id=rid, name=item["name"],
            description=item["description"], lineage=lineage,
            source=item["source"], perspective=item["perspective"],
        ))
    return IngestReport(records=records, rejected=rejected)


PASSTHROUGH_PREFIX = "Tester goal: "


def reframe_perspective(record: KnowledgeRecord,
                        rewriter: Optional[Callable[[str], str]] = None) -> KnowledgeRecord:
    """Restate an adversary-voiced record from the tester's point of view.

    With no rewriter (or a failing one) the description is prefixed rather
    than rewritten; either way the result carries the pentester perspective.
    """
    if record.perspective is Perspective.PENTESTER:
        return record
    text: Optional[str] = None
    if rewriter is not None:
        try:
            candidate = rewriter(record.description)
            if isinstance(candidate, str) and candidate.strip():
                text = candidate.strip()
            else:
                raise ValueError("rewriter returned empty or non-string output")
        except Exception as exc:
            logger.warning("perspective rewrite failed for %s (%s); using passthrough",
                           record.record_id, exc)
    if text is None:
        text = PASSTHROUGH_PREFIX + record.description
    return replace(record, description=text, perspective=Perspective.PENTESTER)


def read_source_entries(path: str | Path) -> list[dict[str, Any]]:
    """Read raw entries from a JSONL file (one object per line)."""
    entries = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        if not line.strip():
            continue
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise MalformedEntry(f"{path}:{i + 1}: invalid JSON ({exc})") from exc
    return entries


def write_records(path: str | Path, records: Iterable[KnowledgeRecord]) -> None:
    lines = [json.dumps(r.to_json(), sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_records(path: str | Path) -> list[KnowledgeRecord]:
    return [KnowledgeRecord.from_json(doc) for doc in read_source_entries(path)]
