"""Deterministic stand-in for a vulnerable host.

A scenario is an ordered rule list; a command fires the first rule whose
pattern matches and whose required state tags are already held. Firing can
grant new tags (opening later rules) and reveal flags. Same command sequence,
same transcripts — which is what replay and the end-to-end fixtures rely on.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

FORMAT_TAG = "refpt-scenario/1"


@dataclass(frozen=True)
class TargetRule:
    pattern: str
    output: str
    requires: frozenset[str] = frozenset()
    grants: frozenset[str] = frozenset()
    flags: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "pattern": self.pattern,
            "output": self.output,
            "requires": sorted(self.requires),
            "grants": sorted(self.grants),
            "flags": list(self.flags),
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "TargetRule":
        return cls(
            pattern=doc["pattern"],
            output=doc["output"],
            requires=frozenset(doc.get("requires", [])),
            grants=frozenset(doc.get("grants", [])),
            flags=tuple(doc.get("flags", [])),
        )


@dataclass
class ExecutionRecord:
    command: str
    output: str
    rule_index: int  # -1 when no rule fired


class ScriptedTarget:
    """Executes commands against an ordered rule list with a tag-state gate."""

    def __init__(self, rules: Iterable[TargetRule], flags_total: int,
                 default_output: str = "sh: {command}: command not found"):
        self.rules = list(rules)
        self.flags_total = flags_total
        self.default_output = default_output
        self.state: set[str] = set()
        self.revealed: list[str] = []
        self.history: list[ExecutionRecord] = []
        declared = [f for rule in self.rules for f in rule.flags]
        if len(declared) != len(set(declared)):
            raise ValueError("scenario declares the same flag in more than one rule")
        if len(declared) < flags_total:
            raise ValueError(
                f"scenario declares {len(declared)} flags but flags_total={flags_total}")

    @classmethod
    def load(cls, path: str | Path) -> "ScriptedTarget":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if doc.get("format") != FORMAT_TAG:
            raise ValueError(f"{path} is not a {FORMAT_TAG} scenario")
        return cls(
            rules=[TargetRule.from_json(r) for r in doc["rules"]],
            flags_total=doc["flags_total"],
            default_output=doc.get("default_output", "sh: {command}: command not found"),
        )

    def save(self, path: str | Path) -> None:
        doc = {
            "format": FORMAT_TAG,
            "flags_total": self.flags_total,
            "default_output": self.default_output,
            "rules": [r.to_json() for r in self.rules],
        }
        Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    def execute(self, command: str) -> str:
        """Run one command: first pattern+state match wins, else the default line."""
        for i, rule in enumerate(self.rules):
            if re.search(rule.pattern, command) and rule.requires <= self.state:
                self.state |= rule.grants
                for flag in rule.flags:
                    if flag not in self.revealed:
                        self.revealed.append(flag)
                self.history.append(ExecutionRecord(command, rule.output, i))
                return rule.output
        output = self.default_output.format(command=command.split()[0] if command.split() else command)
        self.history.append(ExecutionRecord(command, output, -1))
        return output

    @property
    def revealed_count(self) -> int:
        return len(self.revealed)

    def reset(self) -> None:
        self.state.clear()
        self.revealed.clear()
        self.history.clear()
