"""Shared fixtures: a miniature one-flag engagement every layer can drive.

The mini corpus has a single tactic/technique so retrieval is trivially
predictable; the scripted backend is keyed on unique per-iteration prompts;
the scenario gates each phase's command on the tag granted by the previous
one. Branch tests copy the base script and swap individual entries.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any

import pytest

from refpt.knowledge_base import embed_and_index, ingest_records
from refpt.llm_gateway import HashEmbedder

MINI_RAW_ENTRIES = [
    {"tier": "tactic", "id": "TAC-OPS", "name": "Operations",
     "description": "general purpose operations covering every phase of the exercise"},
    {"tier": "technique", "id": "TEC-OPS", "parent": "TAC-OPS",
     "name": "Hands On Keyboard",
     "description": "direct interaction with the mini target over its services"},
    {"tier": "action", "id": "ACT-SCAN", "parent": "TEC-OPS",
     "name": "Survey Services",
     "description": "discover and probe the exposed mini services"},
    {"tier": "action", "id": "ACT-EXPLOIT", "parent": "TEC-OPS",
     "name": "Leverage Weakness",
     "description": "use the found weakness to gain and extend access"},
    {"tier": "action", "id": "ACT-DOC", "parent": "TEC-OPS",
     "name": "Record Findings",
     "description": "write down captured evidence for the report"},
]

MINI_QS = [
    "map the mini target surface",
    "find a weakness in the exposed services",
    "break into the weak endpoint",
    "expand control on the host",
    "take the flag material",
    "write the engagement report",
    "wrap up the exercise",
]

MINI_DOC_RESULT = ("[m-doc] Recorded FLAG{mini-1} and the eval-to-backupctl "
                   "path in the engagement report.")


def mini_records():
    report = ingest_records(MINI_RAW_ENTRIES)
    assert report.ok, report.rejected
    return report.records


def mini_scenario_doc() -> dict[str, Any]:
    return {
        "format": "refpt-scenario/1",
        "flags_total": 1,
        "default_output": "sh: {command}: command not found",
        "rules": [
            {"pattern": "^scan-mini", "requires": [], "grants": ["mapped"],
             "output": "[m-recon] 22/tcp ssh and 8080/tcp http-alt open on mini.lab",
             "flags": []},
            {"pattern": "^probe-mini", "requires": ["mapped"], "grants": ["weak"],
             "output": "[m-vuln] /debug endpoint allows unauthenticated eval",
             "flags": []},
            {"pattern": "^exploit-mini", "requires": ["weak"], "grants": ["shell"],
             "output": "[m-shell] eval payload returned uid=1001(svc) shell",
             "flags": []},
            {"pattern": "^loot-mini", "requires": ["shell"], "grants": ["priv"],
             "output": "[m-priv] svc user may run backupctl as root",
             "flags": []},
            {"pattern": "^grab-mini", "requires": ["priv"], "grants": [],
             "output": "[m-flag] backupctl config leaked FLAG{mini-1}",
             "flags": ["FLAG{mini-1}"]},
        ],
    }


def mini_script_entries() -> list[dict[str, Any]]:
    E = "event_extractor"
    A = "action_selector"
    G = "guidance_generator"
    R = "reward_judge"

    def guide(explanation, command):
        return {"steps": [{"explanation": explanation, "command": command}]}

    return [
        # -- progress events, keyed on the newest result
        {"role": E, "match": ["(no recorded experiences)"],
         "response": {"gathered_information": "not_achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: $ scan-mini"],
         "response": {"gathered_information": "achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: $ probe-mini"],
         "response": {"identified_vulnerability": "achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: $ exploit-mini --eval"],
         "response": {"exploited": "achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: $ loot-mini"],
         "response": {"post_exploited": "achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: $ grab-mini"],
         "response": {"flag_captured": "achieved"}},
        {"role": E, "match": ["MOST RECENT RESULT: [m-doc]"],
         "response": {"documented": "achieved"}},
        # -- action choices, keyed on instruction + candidate + newest result
        # (the newest-result fragment pins each entry to its iteration: the
        # prompt's log section carries every past instruction text)
        {"role": A, "match": ["map the mini target", "(no recorded experiences)",
                              "ACT-SCAN"],
         "response": {"k": 0, "action_id": "ACT-SCAN"}},
        {"role": A, "match": ["find a weakness", "MOST RECENT RESULT: $ scan-mini",
                              "ACT-SCAN"],
         "response": {"k": 0, "action_id": "ACT-SCAN"}},
        {"role": A, "match": ["break into the weak endpoint",
                              "MOST RECENT RESULT: $ probe-mini", "ACT-EXPLOIT"],
         "response": {"k": 0, "action_id": "ACT-EXPLOIT"}},
        {"role": A, "match": ["expand control",
                              "MOST RECENT RESULT: $ exploit-mini", "ACT-EXPLOIT"],
         "response": {"k": 0, "action_id": "ACT-EXPLOIT"}},
        {"role": A, "match": ["take the flag",
                              "MOST RECENT RESULT: $ loot-mini", "ACT-EXPLOIT"],
         "response": {"k": 0, "action_id": "ACT-EXPLOIT"}},
        {"role": A, "match": ["write the engagement report",
                              "MOST RECENT RESULT: $ grab-mini", "ACT-DOC"],
         "response": {"k": 0, "action_id": "ACT-DOC"}},
        # -- guidance, keyed on instruction
        {"role": G, "match": ["map the mini target"],
         "response": guide("Scan the mini target's service surface.",
                           "scan-mini --full")},
        {"role": G, "match": ["find a weakness"],
         "response": guide("Probe the http-alt service for exposed endpoints.",
                           "probe-mini /debug")},
        {"role": G, "match": ["break into the weak endpoint"],
         "response": guide("Send an eval payload through the debug endpoint.",
                           "exploit-mini --eval id")},
        {"role": G, "match": ["expand control"],
         "response": guide("Check what the service account can do.",
                           "loot-mini sudo-check")},
        {"role": G, "match": ["take the flag"],
         "response": guide("Read the leaked backupctl configuration.",
                           "grab-mini backupctl")},
        {"role": G, "match": ["write the engagement report"],
         "response": {"steps": [{
             "explanation": "Record the captured flag and the path that produced "
                            "it in the engagement report.",
             "command": None, "observe_only": True}]}},
        # -- rewards, keyed on target output markers
        {"role": R, "match": ["[m-recon]"],
         "response": {"r": 2, "rationale": "services mapped"}},
        {"role": R, "match": ["[m-vuln]"],
         "response": {"r": 2, "rationale": "weakness identified"}},
        {"role": R, "match": ["[m-shell]"],
         "response": {"r": 2, "rationale": "execution confirmed"}},
        {"role": R, "match": ["[m-priv]"],
         "response": {"r": 2, "rationale": "control extended"}},
        {"role": R, "match": ["[m-flag]"],
         "response": {"r": 2, "rationale": "flag captured"}},
        {"role": R, "match": ["[m-doc]"],
         "response": {"r": 2, "rationale": "evidence recorded"}},
    ]


def mini_plan_doc() -> dict[str, Any]:
    instructions: list[dict[str, Any]] = [{"q": q} for q in MINI_QS]
    instructions[5]["manual_results"] = [MINI_DOC_RESULT]
    return {"format": "refpt-plan/1", "instructions": instructions}


def replace_entry(entries: list[dict], role: str, frag: str,
                  response: Any = None, match: list[str] | None = None) -> None:
    """Swap the response (and optionally the match key) of one script entry."""
    for entry in entries:
        if entry["role"] == role and any(frag in m for m in entry["match"]):
            if response is not None:
                entry["response"] = response
            if match is not None:
                entry["match"] = match
            return
    raise KeyError(f"no entry for role={role} frag={frag}")


def write_mini_files(base: Path, script_entries: list[dict] | None = None) -> dict[str, str]:
    """Materialize store/scenario/script/plan under base; returns their paths."""
    base.mkdir(parents=True, exist_ok=True)
    store_path = base / "mini.store.json"
    if not store_path.exists():
        store = embed_and_index(mini_records(), HashEmbedder(64),
                                lambda_threshold=-1.0)
        store.save(store_path)
    scenario_path = base / "mini.scenario.json"
    scenario_path.write_text(json.dumps(mini_scenario_doc(), indent=2))
    script_path = base / "mini.script.json"
    script_path.write_text(json.dumps(
        {"entries": script_entries or mini_script_entries()}, indent=2))
    plan_path = base / "mini.plan.json"
    plan_path.write_text(json.dumps(mini_plan_doc(), indent=2))
    return {
        "store": str(store_path),
        "scenario": str(scenario_path),
        "script": str(script_path),
        "plan": str(plan_path),
    }


@pytest.fixture(scope="session")
def mini_dir(tmp_path_factory) -> dict[str, str]:
    return write_mini_files(tmp_path_factory.mktemp("mini"))


@pytest.fixture()
def mini_script() -> list[dict[str, Any]]:
    return copy.deepcopy(mini_script_entries())
