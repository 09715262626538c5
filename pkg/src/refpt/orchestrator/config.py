"""Session and backend configuration."""

from __future__ import annotations

import json
import os
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from ..errors import BackendConfigError


@dataclass
class BackendConfig:
    """Which completion backend a session talks to."""

    kind: str = "scripted"  # "scripted" | "remote"
    script_path: Optional[str] = None
    endpoint: Optional[str] = None
    model: Optional[str] = None
    token_env: str = "REFPT_API_TOKEN"
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in ("scripted", "remote"):
            raise BackendConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == "scripted" and not self.script_path:
            raise BackendConfigError("scripted backend needs script_path")

    def resolve_remote(self) -> tuple[str, str, Optional[str]]:
        """Endpoint/model/token for the remote kind, env vars filling gaps."""
        endpoint = self.endpoint or os.environ.get("REFPT_ENDPOINT")
        model = self.model or os.environ.get("REFPT_MODEL")
        if not endpoint or not model:
            raise BackendConfigError(
                "remote backend needs endpoint and model "
                "(config fields or REFPT_ENDPOINT / REFPT_MODEL)")
        return endpoint, model, os.environ.get(self.token_env)

    def to_json(self) -> dict[str, Any]:
        return {
            "kind": self.kind, "script_path": self.script_path,
            "endpoint": self.endpoint, "model": self.model,
            "token_env": self.token_env, "timeout": self.timeout,
        }

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "BackendConfig":
        return cls(
            kind=doc.get("kind", "scripted"),
            script_path=doc.get("script_path"),
            endpoint=doc.get("endpoint"),
            model=doc.get("model"),
            token_env=doc.get("token_env", "REFPT_API_TOKEN"),
            timeout=doc.get("timeout", 120.0),
        )


@dataclass
class SessionConfig:
    store_path: str
    flags_total: int
    backend: BackendConfig
    transcript_path: Optional[str] = None
    lambda_override: Optional[float] = None
    prompts_dir: Optional[str] = None
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])

    def __post_init__(self):
        # transcript_path=None keeps the transcript in memory only.
        if self.flags_total < 1:
            raise ValueError("flags_total must be >= 1")
        if self.lambda_override is not None and not -1.0 <= self.lambda_override < 1.0:
            raise ValueError("lambda_override must be a cosine threshold in [-1, 1)")


def load_config(path: str | Path) -> SessionConfig:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return SessionConfig(
        store_path=doc["store_path"],
        flags_total=doc["flags_total"],
        backend=BackendConfig.from_json(doc.get("backend", {})),
        transcript_path=doc.get("transcript_path"),
        lambda_override=doc.get("lambda_override"),
        prompts_dir=doc.get("prompts_dir"),
        session_id=doc.get("session_id", uuid.uuid4().hex[:12]),
    )
