"""Embedded three-tier store with coarse-to-fine retrieval.

Retrieval walks tactic -> technique -> action: one argmax per tier, each
narrowed to the children of the pick above it, with the action tier returning
every candidate above the similarity threshold instead of a single winner.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Callable, Iterable, Optional

import numpy as np

from ..errors import (
    DanglingLineage,
    DimensionMismatch,
    EmptyText,
    EmptyTier,
    MalformedEntry,
    StoreLoadFailure,
    UnknownRecordId,
)
from ..llm_gateway.embedding import Embedder, get_embedder
from ..splice import splice
from .records import KnowledgeRecord, Perspective, Tier, reframe_perspective

logger = logging.getLogger(__name__)

FORMAT_TAG = "refpt-kb/1"
DEFAULT_LAMBDA = 0.45


def record_embed_text(record: KnowledgeRecord,
                      by_id: dict[str, KnowledgeRecord]) -> str:
    """Text a record embeds under: its lineage names, its own name, its description."""
    lines = []
    for ancestor_id in record.lineage:
        ancestor = by_id[ancestor_id]
        lines.append(f"{ancestor.record_id} {ancestor.name}")
    lines.append(f"{record.record_id} {record.name}")
    if record.description:
        lines.append(record.description)
    return "\n".join(lines)


class RetrievalResult:
    """One coarse-to-fine walk: the chosen tactic/technique and ranked actions."""

    def __init__(self, tactic: KnowledgeRecord, technique: KnowledgeRecord,
                 actions: list[KnowledgeRecord], similarities: list[float]):
        self.tactic = tactic
        self.technique = technique
        self.actions = actions
        self.similarities = similarities

    def to_json(self) -> dict[str, Any]:
        return {
            "tactic": self.tactic.to_json(),
            "technique": self.technique.to_json(),
            "actions": [a.to_json() for a in self.actions],
            "similarities": self.similarities,
        }


class KnowledgeStore:
    """Records plus unit-normalized embedding matrices, one per tier.

    Row order within a tier is ascending record id; argmax returns the first
    maximum, so similarity ties resolve to the lexicographically smallest id
    without any extra bookkeeping.
    """

    def __init__(self, records: dict[str, KnowledgeRecord], embedder: Embedder,
                 vectors: dict[Tier, tuple[list[str], np.ndarray]],
                 lambda_threshold: float = DEFAULT_LAMBDA):
        self.records = records
        self.embedder = embedder
        self._tiers = vectors  # tier -> (ids sorted ascending, matrix aligned to ids)
        self.lambda_threshold = lambda_threshold
        self._children: dict[str, list[str]] = {}
        for rid, rec in records.items():
            if rec.lineage:
                self._children.setdefault(rec.lineage[-1], []).append(rid)
        for kids in self._children.values():
            kids.sort()

    # -- introspection ---------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.embedder.dimension

    def tier_ids(self, tier: Tier) -> list[str]:
        return list(self._tiers[tier][0])

    def counts(self) -> dict[str, int]:
        return {tier.value: len(self._tiers[tier][0]) for tier in Tier}

    def lookup(self, record_id: str) -> KnowledgeRecord:
        try:
            return self.records[record_id]
        except KeyError:
            raise UnknownRecordId(f"no record with id {record_id!r}") from None

    def children_of(self, record_id: str) -> list[KnowledgeRecord]:
        return [self.records[rid] for rid in self._children.get(record_id, [])]

    # -- retrieval -------------------------------------------------------

    def _query_vector(self, text: str) -> np.ndarray:
        vec = self.embedder.embed(text)
        if vec.shape != (self.dimension,):
            raise DimensionMismatch(
                f"query embedded to {vec.shape}, store dimension is {self.dimension}")
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise EmptyText("query has no embeddable content")
        return vec / norm

    def _argmax_restricted(self, tier: Tier, qvec: np.ndarray,
                           allowed: Optional[set[str]] = None) -> tuple[str, float]:
        ids, matrix = self._tiers[tier]
        if allowed is not None:
            keep = [i for i, rid in enumerate(ids) if rid in allowed]
            if not keep:
                raise EmptyTier(f"no {tier.value} candidates after restriction")
            ids = [ids[i] for i in keep]
            matrix = matrix[keep]
        if not ids:
            raise EmptyTier(f"store has no {tier.value} records")
        sims = matrix @ qvec
        best = int(np.argmax(sims))  # first max -> smallest id on ties
        return ids[best], float(sims[best])

    def retrieve(self, instruction: str, stage_text: str) -> RetrievalResult:
        """Coarse-to-fine walk for one (instruction, stage) query."""
        q1 = self._query_vector(splice(INSTRUCTION=instruction, STAGE=stage_text))
        tactic_id, _ = self._argmax_restricted(Tier.TACTIC, q1)
        tactic = self.records[tactic_id]

        tech_allowed = {rid for rid in self._children.get(tactic_id, [])
                        if self.records[rid].tier is Tier.TECHNIQUE}
        if not tech_allowed:
            raise EmptyTier(f"tactic {tactic_id} has no techniques")
        q2 = self._query_vector(splice(
            INSTRUCTION=instruction, STAGE=stage_text,
            TACTIC=f"{tactic.record_id} {tactic.name}"))
        technique_id, _ = self._argmax_restricted(Tier.TECHNIQUE, q2, tech_allowed)
        technique = self.records[technique_id]

        action_ids = [rid for rid in self._children.get(technique_id, [])
                      if self.records[rid].tier is Tier.ACTION]
        q3 = self._query_vector(splice(
            INSTRUCTION=instruction, STAGE=stage_text,
            TACTIC=f"{tactic.record_id} {tactic.name}",
            TECHNIQUE=f"{technique.record_id} {technique.name}"))
        ids, matrix = self._tiers[Tier.ACTION]
        index_of = {rid: i for i, rid in enumerate(ids)}
        scored = []
        for rid in action_ids:
            sim = float(matrix[index_of[rid]] @ q3)
            if sim > self.lambda_threshold:
                scored.append((rid, sim))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return RetrievalResult(
            tactic=tactic,
            technique=technique,
            actions=[self.records[rid] for rid, _ in scored],
            similarities=[sim for _, sim in scored],
        )

    # -- persistence -----------------------------------------------------

    def save(self, path: str | Path) -> None:
        ordered = sorted(self.records.values(),
                         key=lambda r: (r.tier.value, r.record_id))
        doc = {
            "format": FORMAT_TAG,
            "manifest": {
                "embedder": self.embedder.name,
                "dimension": self.dimension,
                "lambda": self.lambda_threshold,
                "counts": self.counts(),
            },
            "records": [r.to_json() for r in ordered],
            "vectors": {
                tier.value: [[rid, vec.tolist()] for rid, vec in
                             zip(self._tiers[tier][0], self._tiers[tier][1])]
                for tier in Tier
            },
        }
        Path(path).write_text(
            json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, embedder: Optional[Embedder] = None) -> "KnowledgeStore":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise StoreLoadFailure(f"cannot read store {path}: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
            raise StoreLoadFailure(
                f"{path} is not a {FORMAT_TAG} store (format={doc.get('format')!r})")
        manifest = doc["manifest"]
        if embedder is None:
            embedder = get_embedder(manifest["embedder"])
        if embedder.dimension != manifest["dimension"]:
            raise DimensionMismatch(
                f"store was built at dimension {manifest['dimension']}, "
                f"embedder provides {embedder.dimension}")
        records = {}
        for raw in doc["records"]:
            rec = KnowledgeRecord.from_json(raw)
            records[rec.record_id] = rec
        vectors: dict[Tier, tuple[list[str], np.ndarray]] = {}
        for tier in Tier:
            rows = doc["vectors"].get(tier.value, [])
            ids = [rid for rid, _ in rows]
            if ids != sorted(ids):
                raise StoreLoadFailure(f"{tier.value} vector rows are not id-sorted")
            matrix = (np.array([vec for _, vec in rows], dtype=np.float64)
                      if rows else np.zeros((0, manifest["dimension"])))
            if rows and matrix.shape[1] != manifest["dimension"]:
                raise StoreLoadFailure(f"{tier.value} vectors have wrong width")
            vectors[tier] = (ids, matrix)
        counts = {tier.value: len(vectors[tier][0]) for tier in Tier}
        if counts != manifest["counts"]:
            raise StoreLoadFailure(
                f"manifest counts {manifest['counts']} != stored rows {counts}")
        return cls(records=records, embedder=embedder, vectors=vectors,
                   lambda_threshold=manifest.get("lambda", DEFAULT_LAMBDA))


def _validate_lineage(records: list[KnowledgeRecord]) -> None:
    by_id: dict[str, KnowledgeRecord] = {}
    for rec in records:
        if rec.record_id in by_id:
            raise MalformedEntry(f"duplicate record id {rec.record_id!r}")
        by_id[rec.record_id] = rec
    expected_parent = {Tier.TECHNIQUE: Tier.TACTIC, Tier.ACTION: Tier.TECHNIQUE}
    for rec in records:
        if rec.tier is Tier.TACTIC:
            continue
        for ancestor_id, want in zip(rec.lineage, (Tier.TACTIC, Tier.TECHNIQUE)):
            ancestor = by_id.get(ancestor_id)
            if ancestor is None:
                raise DanglingLineage(f"{rec.record_id}: lineage id {ancestor_id!r} missing")
            if ancestor.tier is not want:
                raise DanglingLineage(
                    f"{rec.record_id}: lineage id {ancestor_id!r} is a "
                    f"{ancestor.tier.value}, expected {want.value}")
        if rec.tier is Tier.ACTION:
            technique = by_id[rec.lineage[1]]
            if technique.lineage[0] != rec.lineage[0]:
                raise DanglingLineage(
                    f"{rec.record_id}: lineage tactic {rec.lineage[0]!r} disagrees "
                    f"with technique parent {technique.lineage[0]!r}")


def embed_and_index(records: Iterable[KnowledgeRecord], embedder: Embedder,
                    lambda_threshold: float = DEFAULT_LAMBDA,
                    rewriter: Optional[Callable[[str], str]] = None) -> KnowledgeStore:
    """Build a store: normalize perspective, embed every record, index by tier."""
    incoming = list(records)
    _validate_lineage(incoming)
    normalized = {}
    for rec in incoming:
        if rec.perspective is Perspective.ADVERSARY:
            rec = reframe_perspective(rec, rewriter)
        normalized[rec.record_id] = rec

    vectors: dict[Tier, tuple[list[str], np.ndarray]] = {}
    for tier in Tier:
        ids = sorted(rid for rid, rec in normalized.items() if rec.tier is tier)
        rows = []
        for rid in ids:
            text = record_embed_text(normalized[rid], normalized)
            vec = embedder.embed(text)
            if vec.shape != (embedder.dimension,):
                raise DimensionMismatch(
                    f"{rid} embedded to {vec.shape}, expected ({embedder.dimension},)")
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise EmptyText(f"record {rid} has no embeddable content")
            rows.append(vec / norm)
        matrix = np.array(rows) if rows else np.zeros((0, embedder.dimension))
        vectors[tier] = (ids, matrix)
    return KnowledgeStore(records=normalized, embedder=embedder,
                          vectors=vectors, lambda_threshold=lambda_threshold)
