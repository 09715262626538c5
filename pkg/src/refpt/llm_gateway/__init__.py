"""Gateway between the engine and its language-model roles.

Five fixed sessions (event extraction, action selection, guidance generation,
failure analysis, reward judging), each with a pinned system prompt and a JSON
schema its replies must satisfy. The backend behind them is either a scripted
player for deterministic runs or a remote OpenAI-compatible API.
"""

from __future__ import annotations

import json
import logging
from typing import Any, Optional, Union

import jsonschema
import numpy as np

from ..errors import EmptyText, SchemaViolation
from .backends import RemoteBackend, ScriptedBackend, ScriptEntry
from .embedding import Embedder, HashEmbedder, RemoteEmbedder, get_embedder, tokenize
from .roles import ROLE_SCHEMA_ID, SCHEMAS, Role, SessionSpec, StructuredResponse, default_specs

logger = logging.getLogger(__name__)

__all__ = [
    "Gateway", "Role", "SessionSpec", "StructuredResponse",
    "ScriptedBackend", "ScriptEntry", "RemoteBackend",
    "Embedder", "HashEmbedder", "RemoteEmbedder", "get_embedder", "tokenize",
    "SCHEMAS", "ROLE_SCHEMA_ID", "default_specs",
]

_REPAIR_NOTE = (
    "Your previous reply was not valid against the required JSON contract: {error}. "
    "Reply again with only a corrected JSON object."
)


def _parse_json_object(text: str) -> dict[str, Any]:
    cleaned = text.strip()
    if cleaned.startswith("```"):
        cleaned = cleaned.strip("`")
        if cleaned.startswith("json"):
            cleaned = cleaned[4:]
        cleaned = cleaned.strip()
    obj = json.loads(cleaned)
    if not isinstance(obj, dict):
        raise ValueError("top-level JSON value is not an object")
    return obj


def _semantic_check(role: Role, payload: dict[str, Any]) -> None:
    """Contract details jsonschema alone does not express."""
    if role is Role.EVENT_EXTRACTOR:
        if not any(v in ("achieved", "not_achieved") for v in payload.values()):
            raise ValueError("event resolves no goal signal")


class Gateway:
    """Role-routed structured completions plus text embedding."""

    def __init__(self, backend: Union[ScriptedBackend, RemoteBackend],
                 embedder: Optional[Embedder] = None,
                 specs: Optional[dict[Role, SessionSpec]] = None):
        self.backend = backend
        self.embedder = embedder if embedder is not None else HashEmbedder(256)
        self.specs = specs if specs is not None else default_specs()
        self._histories: dict[Role, list[dict[str, str]]] = {role: [] for role in Role}

    # -- completions ---------------------------------------------------

    def complete_structured(self, role: Role, prompt: str) -> StructuredResponse:
        spec = self.specs[role]
        schema = SCHEMAS[spec.output_schema]
        if isinstance(self.backend, ScriptedBackend):
            payload = self.backend.complete(role.value, prompt)
            try:
                jsonschema.validate(payload, schema)
                _semantic_check(role, payload)
            except (jsonschema.ValidationError, ValueError) as exc:
                raise SchemaViolation(f"scripted response for {role.value} invalid: {exc}") from exc
            raw = json.dumps(payload, sort_keys=True)
            self._record(role, prompt, raw)
            return StructuredResponse(role=role, payload=payload, raw_text=raw)

        messages = [{"role": "system", "content": spec.system_prompt}]
        messages += self._histories[role]
        messages.append({"role": "user", "content": prompt})
        last_error = ""
        raw = ""
        for attempt in range(2):
            raw = self.backend.complete_chat(messages, temperature=spec.temperature)
            try:
                payload = _parse_json_object(raw)
                jsonschema.validate(payload, schema)
                _semantic_check(role, payload)
            except (ValueError, jsonschema.ValidationError) as exc:
                last_error = str(exc).splitlines()[0]
                logger.warning("%s reply failed validation (attempt %d): %s",
                               role.value, attempt + 1, last_error)
                messages.append({"role": "assistant", "content": raw})
                messages.append({"role": "user", "content": _REPAIR_NOTE.format(error=last_error)})
                continue
            self._record(role, prompt, raw)
            return StructuredResponse(role=role, payload=payload, raw_text=raw)
        raise SchemaViolation(
            f"{role.value} reply invalid after repair attempt: {last_error}"
        )

    def _record(self, role: Role, prompt: str, raw: str) -> None:
        self._histories[role].append({"role": "user", "content": prompt})
        self._histories[role].append({"role": "assistant", "content": raw})

    def reset_sessions(self) -> None:
        """Drop all per-role conversation history (start of every iteration)."""
        for role in Role:
            self._histories[role].clear()

    # -- embeddings ----------------------------------------------------

    def embed_text(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmptyText("cannot embed empty text")
        return self.embedder.embed(text)
