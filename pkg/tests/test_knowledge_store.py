"""Embedded store: hierarchy walk, thresholds, ties, persistence."""

from __future__ import annotations

import json

import numpy as np
import pytest

from refpt.errors import (
    DanglingLineage,
    DimensionMismatch,
    EmptyText,
    EmptyTier,
    MalformedEntry,
    StoreLoadFailure,
    UnknownRecordId,
)
from refpt.knowledge_base import (
    KnowledgeStore,
    Perspective,
    embed_and_index,
    ingest_records,
)
from refpt.llm_gateway import HashEmbedder
from refpt.stage_machine import Stage

RECON_BATCH = [
    {"tier": "tactic", "id": "TA0043", "name": "Reconnaissance",
     "description": "gather information about the target host and network surface",
     "source": "attack_matrix"},
    {"tier": "tactic", "id": "TA0011", "name": "Command and Control",
     "description": "maintain covert communication channels with compromised systems",
     "source": "attack_matrix"},
    {"tier": "technique", "id": "T1590", "parent": "TA0043",
     "name": "Gather Victim Network Information",
     "description": "scan the target host to map network information"},
    {"tier": "technique", "id": "T1592", "parent": "TA0043",
     "name": "Gather Victim Host Information",
     "description": "research operating system versions from public code repositories"},
    {"tier": "technique", "id": "T1571", "parent": "TA0011",
     "name": "Non-Standard Port",
     "description": "communicate using unexpected protocol and port pairings"},
    {"tier": "action", "id": "OTG-INFO-001", "parent": "T1590",
     "name": "Conduct Search Engine Discovery",
     "description": "use search engines to find exposed host and network details"},
    {"tier": "action", "id": "OTG-INFO-002", "parent": "T1590",
     "name": "Fingerprint Web Server",
     "description": "identify the web server version from response banners"},
    {"tier": "action", "id": "ACT-C2-01", "parent": "T1571",
     "name": "Tunnel Over DNS",
     "description": "wrap command traffic in dns queries"},
]


def build_recon_store(lam=0.1, extra=()):
    report = ingest_records(RECON_BATCH + list(extra))
    assert report.ok, report.rejected
    return embed_and_index(report.records, HashEmbedder(256), lambda_threshold=lam)


class ConstEmbedder:
    """Every text maps to the same vector: every similarity ties exactly."""

    name = "const-8"
    dimension = 8

    def embed(self, text):
        return np.ones(8)


class ZeroEmbedder:
    name = "zero-8"
    dimension = 8

    def embed(self, text):
        return np.zeros(8)


def test_build_counts_and_unit_rows():
    store = build_recon_store()
    assert store.counts() == {"tactic": 2, "technique": 3, "action": 3}
    assert store.dimension == 256
    for tier in store._tiers:
        _, matrix = store._tiers[tier]
        norms = np.linalg.norm(matrix, axis=1)
        assert np.allclose(norms, 1.0)


def test_retrieval_walks_the_hierarchy():
    store = build_recon_store()
    result = store.retrieve("scan the host",
                            Stage.INFORMATION_GATHERING.description)
    assert result.tactic.record_id == "TA0043"
    assert result.technique.record_id == "T1590"
    action_ids = [a.record_id for a in result.actions]
    assert "OTG-INFO-001" in action_ids
    # every returned action belongs to the chosen technique
    assert all(a.lineage == ("TA0043", "T1590") for a in result.actions)
    # similarities sorted descending
    assert result.similarities == sorted(result.similarities, reverse=True)


def test_technique_argmax_restricted_to_chosen_tactic():
    # A technique under the other tactic that mirrors the query text exactly
    # still cannot be picked: restriction beats raw similarity.
    decoy = {"tier": "technique", "id": "T9999", "parent": "TA0011",
             "name": "Scan The Host",
             "description": "scan the host information gathering scan the host"}
    store = build_recon_store(extra=[decoy])
    result = store.retrieve("scan the host",
                            Stage.INFORMATION_GATHERING.description)
    assert result.tactic.record_id == "TA0043"
    assert result.technique.lineage == ("TA0043",)
    assert result.technique.record_id != "T9999"
    # sanity: the decoy really is the raw winner when nothing is restricted
    from refpt.knowledge_base.records import Tier
    from refpt.splice import splice
    q2 = splice(INSTRUCTION="scan the host",
                STAGE=Stage.INFORMATION_GATHERING.description,
                TACTIC="TA0043 Reconnaissance")
    ids, matrix = store._tiers[Tier.TECHNIQUE]
    sims = matrix @ store._query_vector(q2)
    assert ids[int(np.argmax(sims))] == "T9999"


def test_exact_ties_resolve_to_smallest_id():
    report = ingest_records([
        {"tier": "tactic", "id": "TAC-B", "name": "B", "description": "x"},
        {"tier": "tactic", "id": "TAC-A", "name": "A", "description": "x"},
        {"tier": "technique", "id": "TEC-B", "parent": "TAC-A", "name": "B",
         "description": "x"},
        {"tier": "technique", "id": "TEC-A", "parent": "TAC-A", "name": "A",
         "description": "x"},
        {"tier": "action", "id": "ACT-C", "parent": "TEC-A", "name": "C",
         "description": "x"},
        {"tier": "action", "id": "ACT-A", "parent": "TEC-A", "name": "A",
         "description": "x"},
        {"tier": "action", "id": "ACT-B", "parent": "TEC-A", "name": "B",
         "description": "x"},
    ])
    assert report.ok
    store = embed_and_index(report.records, ConstEmbedder(), lambda_threshold=0.5)
    result = store.retrieve("anything", "any stage")
    assert result.tactic.record_id == "TAC-A"
    assert result.technique.record_id == "TEC-A"
    # every similarity is bitwise identical: ordering falls back to ascending id
    assert [a.record_id for a in result.actions] == ["ACT-A", "ACT-B", "ACT-C"]
    assert len(set(result.similarities)) == 1
    assert result.similarities[0] == pytest.approx(1.0)


def test_lambda_filters_and_is_monotone():
    store = build_recon_store()
    stage = Stage.INFORMATION_GATHERING.description
    sets = []
    for lam in (-1.0, 0.40, 0.43, 0.9):
        store.lambda_threshold = lam
        result = store.retrieve("scan the host", stage)
        assert all(sim > lam for sim in result.similarities)
        sets.append({a.record_id for a in result.actions})
    assert sets[0] >= sets[1] >= sets[2] >= sets[3]
    # with no threshold at all, every child action of the technique shows up
    assert sets[0] == {"OTG-INFO-001", "OTG-INFO-002"}
    # and a strict threshold really drops the weaker sibling
    assert sets[1] == {"OTG-INFO-001"}
    assert sets[3] == set()


def test_empty_store_and_childless_tactic():
    empty = embed_and_index([], HashEmbedder(32))
    with pytest.raises(EmptyTier):
        empty.retrieve("scan", "stage")

    report = ingest_records([
        {"tier": "tactic", "id": "TA-LONE", "name": "Lonely",
         "description": "no children here"},
    ])
    lone = embed_and_index(report.records, HashEmbedder(32))
    with pytest.raises(EmptyTier):
        lone.retrieve("scan", "stage")


def test_technique_with_no_actions_gives_empty_candidates():
    report = ingest_records([
        {"tier": "tactic", "id": "TA-1", "name": "Alpha",
         "description": "alpha tactic about scanning hosts"},
        {"tier": "technique", "id": "TE-1", "parent": "TA-1", "name": "Beta",
         "description": "beta technique about scanning hosts"},
    ])
    store = embed_and_index(report.records, HashEmbedder(32))
    result = store.retrieve("scanning hosts", "stage text")
    assert result.actions == [] and result.similarities == []


def test_zero_vector_handling():
    with pytest.raises(EmptyText):
        embed_and_index(ingest_records(RECON_BATCH).records, ZeroEmbedder())
    store = build_recon_store()
    store.embedder = ZeroEmbedder()  # simulate a broken query-time backend
    with pytest.raises((EmptyText, DimensionMismatch)):
        store.retrieve("scan the host", "stage")


def test_lookup_and_children():
    store = build_recon_store()
    assert store.lookup("T1590").name == "Gather Victim Network Information"
    with pytest.raises(UnknownRecordId):
        store.lookup("T0000")
    kids = [r.record_id for r in store.children_of("T1590")]
    assert kids == ["OTG-INFO-001", "OTG-INFO-002"]


def test_adversary_records_reframed_at_build():
    store = build_recon_store()
    tactic = store.lookup("TA0043")
    assert tactic.perspective is Perspective.PENTESTER
    assert tactic.description.startswith("Tester goal: ")


def test_save_load_round_trip(tmp_path):
    store = build_recon_store()
    path = tmp_path / "kb.json"
    store.save(path)
    loaded = KnowledgeStore.load(path)
    assert loaded.counts() == store.counts()
    assert loaded.lambda_threshold == store.lambda_threshold
    q = ("scan the host", Stage.INFORMATION_GATHERING.description)
    before = store.retrieve(*q)
    after = loaded.retrieve(*q)
    assert before.tactic.record_id == after.tactic.record_id
    assert before.technique.record_id == after.technique.record_id
    assert [a.record_id for a in before.actions] == [a.record_id for a in after.actions]
    assert before.similarities == after.similarities

    # rebuilding and resaving is byte-identical
    path2 = tmp_path / "kb2.json"
    build_recon_store().save(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_load_rejects_bad_files(tmp_path):
    store = build_recon_store()
    path = tmp_path / "kb.json"
    store.save(path)

    doc = json.loads(path.read_text())
    doc["format"] = "something/9"
    bad = tmp_path / "bad_format.json"
    bad.write_text(json.dumps(doc))
    with pytest.raises(StoreLoadFailure):
        KnowledgeStore.load(bad)

    doc = json.loads(path.read_text())
    doc["manifest"]["counts"]["action"] = 99
    bad2 = tmp_path / "bad_counts.json"
    bad2.write_text(json.dumps(doc))
    with pytest.raises(StoreLoadFailure):
        KnowledgeStore.load(bad2)

    with pytest.raises(StoreLoadFailure):
        KnowledgeStore.load(tmp_path / "missing.json")

    with pytest.raises(DimensionMismatch):
        KnowledgeStore.load(path, embedder=HashEmbedder(32))


def test_build_validates_lineage():
    report = ingest_records(RECON_BATCH)
    records = list(report.records)
    broken = records + [records[-1].__class__(
        tier=records[-1].tier, record_id="ACT-ORPHAN", name="Orphan",
        description="dangling", lineage=("TA0043", "T-MISSING"))]
    with pytest.raises(DanglingLineage):
        embed_and_index(broken, HashEmbedder(32))
    with pytest.raises(MalformedEntry):
        embed_and_index(records + [records[0]], HashEmbedder(32))
