"""Completion backends: a deterministic scripted player and a remote API client."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..errors import BackendUnavailable, NoScriptMatch


@dataclass(frozen=True)
class ScriptEntry:
    role: str
    match: tuple[str, ...]
    response: Any

    def matches(self, role: str, prompt: str) -> bool:
        return self.role == role and all(frag in prompt for frag in self.match)


class ScriptedBackend:
    """Plays back canned structured responses keyed on prompt substrings.

    Entries are tried in file order; the first whose role matches and whose
    ``match`` fragments all appear in the prompt wins. A miss raises, loudly:
    a script that no longer lines up with the prompts it was written for is a
    bug, not something to paper over.
    """

    def __init__(self, entries: list[ScriptEntry | dict]):
        self.entries = [self._coerce(i, e) for i, e in enumerate(entries)]

    @staticmethod
    def _coerce(index: int, raw: ScriptEntry | dict) -> ScriptEntry:
        if isinstance(raw, ScriptEntry):
            return raw
        try:
            return ScriptEntry(role=raw["role"], match=tuple(raw.get("match", [])),
                               response=raw["response"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad script entry #{index}: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        entries = doc["entries"] if isinstance(doc, dict) else doc
        return cls(entries)

    def complete(self, role: str, prompt: str) -> Any:
        for entry in self.entries:
            if entry.matches(role, prompt):
                return copy.deepcopy(entry.response)
        head = prompt if len(prompt) <= 400 else prompt[:400] + "..."
        raise NoScriptMatch(f"no script entry for role={role!r}; prompt starts:\n{head}")


@dataclass
class RemoteBackend:
    """OpenAI-compatible chat-completions client."""

    endpoint: str
    model: str
    token: Optional[str] = None
    timeout: float = 120.0
    extra_headers: dict[str, str] = field(default_factory=dict)

    def complete_chat(self, messages: list[dict[str, str]], temperature: float = 0.0) -> str:
        import requests

        headers = {"Content-Type": "application/json", **self.extra_headers}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": temperature,
            "response_format": {"type": "json_object"},
        }
        try:
            resp = requests.post(
                f"{self.endpoint.rstrip('/')}/chat/completions",
                json=body, headers=headers, timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise BackendUnavailable(f"chat completion failed: {exc}") from exc
