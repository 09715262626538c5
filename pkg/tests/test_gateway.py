"""Gateway: scripted playback, schema enforcement, remote repair loop, embeddings."""

from __future__ import annotations

import json

import numpy as np
import pytest

from refpt.errors import (
    BackendConfigError,
    BackendUnavailable,
    EmptyText,
    NoScriptMatch,
    SchemaViolation,
)
from refpt.llm_gateway import (
    Gateway,
    HashEmbedder,
    RemoteBackend,
    Role,
    ScriptedBackend,
    ScriptEntry,
    default_specs,
    get_embedder,
)


def scripted(entries):
    return ScriptedBackend([ScriptEntry(role=e["role"], match=tuple(e["match"]),
                                        response=e["response"])
                            for e in entries])


def gw(entries):
    return Gateway(backend=scripted(entries), embedder=HashEmbedder(32))


def test_scripted_first_match_wins():
    g = gw([
        {"role": "reward_judge", "match": ["alpha"], "response": {"r": 0}},
        {"role": "reward_judge", "match": [], "response": {"r": 2}},
    ])
    assert g.complete_structured(Role.REWARD_JUDGE, "has alpha inside").payload["r"] == 0
    assert g.complete_structured(Role.REWARD_JUDGE, "nothing special").payload["r"] == 2


def test_scripted_role_must_match():
    g = gw([{"role": "reward_judge", "match": [], "response": {"r": 2}}])
    with pytest.raises(NoScriptMatch) as excinfo:
        g.complete_structured(Role.FAILURE_ANALYST, "whatever")
    assert "failure_analyst" in str(excinfo.value)


def test_scripted_all_fragments_required():
    g = gw([
        {"role": "reward_judge", "match": ["one", "two"], "response": {"r": 1}},
        {"role": "reward_judge", "match": [], "response": {"r": 2}},
    ])
    assert g.complete_structured(Role.REWARD_JUDGE, "one only").payload["r"] == 2
    assert g.complete_structured(Role.REWARD_JUDGE, "two and one").payload["r"] == 1


def test_responses_are_copies():
    g = gw([{"role": "guidance_generator", "match": [],
             "response": {"steps": [{"explanation": "x", "command": "run"}]}}])
    first = g.complete_structured(Role.GUIDANCE_GENERATOR, "p").payload
    first["steps"][0]["command"] = "mutated"
    second = g.complete_structured(Role.GUIDANCE_GENERATOR, "p").payload
    assert second["steps"][0]["command"] == "run"


@pytest.mark.parametrize("role,payload", [
    (Role.EVENT_EXTRACTOR, {"gathered_information": "definitely"}),
    (Role.EVENT_EXTRACTOR, {"gathered_information": "unknown"}),  # resolves nothing
    (Role.EVENT_EXTRACTOR, {"surprise": "achieved"}),
    (Role.ACTION_SELECTOR, {"k": 0}),
    (Role.ACTION_SELECTOR, {"k": 1, "action_id": "A-1"}),
    (Role.ACTION_SELECTOR, {"k": 2, "action_id": "A-1"}),
    (Role.GUIDANCE_GENERATOR, {"steps": []}),
    (Role.GUIDANCE_GENERATOR, {"steps": [{"explanation": "x"}]}),  # no command, not observe-only
    (Role.FAILURE_ANALYST, {"reason": ""}),
    (Role.REWARD_JUDGE, {"r": 3}),
    (Role.REWARD_JUDGE, {"rationale": "no score"}),
])
def test_schema_violations_from_script(role, payload):
    g = gw([{"role": role.value, "match": [], "response": payload}])
    with pytest.raises(SchemaViolation):
        g.complete_structured(role, "prompt")


def test_observe_only_step_is_valid():
    g = gw([{"role": "guidance_generator", "match": [],
             "response": {"steps": [{"explanation": "watch the output",
                                     "command": None, "observe_only": True}]}}])
    resp = g.complete_structured(Role.GUIDANCE_GENERATOR, "p")
    assert resp.payload["steps"][0]["observe_only"] is True


def test_histories_record_and_reset():
    g = gw([{"role": "reward_judge", "match": [], "response": {"r": 2}}])
    g.complete_structured(Role.REWARD_JUDGE, "first prompt")
    assert len(g._histories[Role.REWARD_JUDGE]) == 2
    g.reset_sessions()
    assert all(not h for h in g._histories.values())


class FakeResponse:
    def __init__(self, content):
        self._content = content

    def raise_for_status(self):
        pass

    def json(self):
        return {"choices": [{"message": {"content": self._content}}]}


def test_remote_repair_retry(monkeypatch):
    replies = iter(["not json at all",
                    json.dumps({"r": 2, "rationale": "fixed"})])
    calls = []

    def fake_post(url, json=None, headers=None, timeout=None):
        calls.append(json)
        return FakeResponse(next(replies))

    monkeypatch.setattr("requests.post", fake_post)
    g = Gateway(backend=RemoteBackend(endpoint="http://api.test/v1", model="m"),
                embedder=HashEmbedder(16))
    resp = g.complete_structured(Role.REWARD_JUDGE, "score this")
    assert resp.payload == {"r": 2, "rationale": "fixed"}
    assert len(calls) == 2
    # the retry carried the repair note
    roles = [m["role"] for m in calls[1]["messages"]]
    assert roles == ["system", "user", "assistant", "user"]
    assert "JSON" in calls[1]["messages"][-1]["content"]


def test_remote_gives_up_after_one_repair(monkeypatch):
    monkeypatch.setattr("requests.post",
                        lambda *a, **k: FakeResponse("still not json"))
    g = Gateway(backend=RemoteBackend(endpoint="http://api.test/v1", model="m"),
                embedder=HashEmbedder(16))
    with pytest.raises(SchemaViolation):
        g.complete_structured(Role.REWARD_JUDGE, "score this")


def test_remote_connection_error(monkeypatch):
    def boom(*a, **k):
        raise OSError("connection refused")

    monkeypatch.setattr("requests.post", boom)
    g = Gateway(backend=RemoteBackend(endpoint="http://api.test/v1", model="m"),
                embedder=HashEmbedder(16))
    with pytest.raises(BackendUnavailable):
        g.complete_structured(Role.REWARD_JUDGE, "score this")


def test_remote_strips_code_fences(monkeypatch):
    fenced = "```json\n{\"r\": 1}\n```"
    monkeypatch.setattr("requests.post", lambda *a, **k: FakeResponse(fenced))
    g = Gateway(backend=RemoteBackend(endpoint="http://api.test/v1", model="m"),
                embedder=HashEmbedder(16))
    assert g.complete_structured(Role.REWARD_JUDGE, "p").payload["r"] == 1


def test_embed_text_roundtrip_and_empty():
    g = gw([])
    v1 = g.embed_text("scan the host")
    v2 = g.embed_text("scan the host")
    assert v1.shape == (32,)
    assert np.array_equal(v1, v2)
    with pytest.raises(EmptyText):
        g.embed_text("   ")


def test_hash_embedder_is_order_insensitive_and_case_folding():
    e = HashEmbedder(64)
    assert np.array_equal(e.embed("Scan the HOST"), e.embed("host the scan"))
    assert not np.array_equal(e.embed("scan host"), e.embed("scan hosts"))
    # token multiplicity matters
    assert not np.array_equal(e.embed("scan scan host"), e.embed("scan host"))


def test_hash_embedder_tokenless_text_is_zero():
    e = HashEmbedder(16)
    assert not e.embed("!!! ---").any()


def test_get_embedder_parsing():
    e = get_embedder("hash-v1-64")
    assert e.dimension == 64 and e.name == "hash-v1-64"
    with pytest.raises(BackendConfigError):
        get_embedder("hash-v1-abc")
    with pytest.raises(BackendConfigError):
        get_embedder("word2vec")
    with pytest.raises(BackendConfigError):
        get_embedder("remote:model-only")


def test_prompt_override_dir(tmp_path):
    (tmp_path / "reward_judge.txt").write_text("Custom rubric text.\n")
    specs = default_specs(tmp_path)
    assert specs[Role.REWARD_JUDGE].system_prompt.startswith("Custom rubric")
    # roles without an override file keep the packaged prompt
    assert "guidance" in specs[Role.GUIDANCE_GENERATOR].system_prompt.lower()


def test_script_file_round_trip(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps({"entries": [
        {"role": "reward_judge", "match": ["x"], "response": {"r": 2}}]}))
    backend = ScriptedBackend.from_file(path)
    assert backend.complete("reward_judge", "has x") == {"r": 2}
    with pytest.raises(NoScriptMatch):
        backend.complete("reward_judge", "no match here")
