"""Role-scoped session definitions and their structured-output contracts."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Optional


class Role(enum.Enum):
    EVENT_EXTRACTOR = "event_extractor"
    ACTION_SELECTOR = "action_selector"
    GUIDANCE_GENERATOR = "guidance_generator"
    FAILURE_ANALYST = "failure_analyst"
    REWARD_JUDGE = "reward_judge"


_TRISTATE = {"enum": ["achieved", "not_achieved", "unknown"]}

# jsonschema documents, keyed by schema identifier.
SCHEMAS: dict[str, dict[str, Any]] = {
    "pt-event/1": {
        "type": "object",
        "properties": {
            "gathered_information": _TRISTATE,
            "identified_vulnerability": _TRISTATE,
            "exploited": _TRISTATE,
            "post_exploited": _TRISTATE,
            "flag_captured": _TRISTATE,
            "documented": _TRISTATE,
        },
        "additionalProperties": False,
    },
    "action-choice/1": {
        "type": "object",
        "oneOf": [
            {
                "properties": {
                    "k": {"const": 0},
                    "action_id": {"type": "string", "minLength": 1},
                },
                "required": ["k", "action_id"],
                "additionalProperties": False,
            },
            {
                "properties": {
                    "k": {"const": 1},
                    "new_action_text": {"type": "string", "minLength": 1},
                },
                "required": ["k", "new_action_text"],
                "additionalProperties": False,
            },
        ],
    },
    "guidance/1": {
        "type": "object",
        "properties": {
            "steps": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "properties": {
                        "explanation": {"type": "string", "minLength": 1},
                        "command": {"type": ["string", "null"]},
                        "observe_only": {"type": "boolean"},
                    },
                    "required": ["explanation"],
                    "additionalProperties": False,
                    "anyOf": [
                        {
                            "properties": {"command": {"type": "string", "minLength": 1}},
                            "required": ["command"],
                        },
                        {
                            "properties": {"observe_only": {"const": True}},
                            "required": ["observe_only"],
                        },
                    ],
                },
            }
        },
        "required": ["steps"],
        "additionalProperties": False,
    },
    "failure-reason/1": {
        "type": "object",
        "properties": {"reason": {"type": "string", "minLength": 1}},
        "required": ["reason"],
        "additionalProperties": False,
    },
    "reward/1": {
        "type": "object",
        "properties": {
            "r": {"enum": [0, 1, 2]},
            "rationale": {"type": "string"},
        },
        "required": ["r"],
        "additionalProperties": False,
    },
}

ROLE_SCHEMA_ID: dict[Role, str] = {
    Role.EVENT_EXTRACTOR: "pt-event/1",
    Role.ACTION_SELECTOR: "action-choice/1",
    Role.GUIDANCE_GENERATOR: "guidance/1",
    Role.FAILURE_ANALYST: "failure-reason/1",
    Role.REWARD_JUDGE: "reward/1",
}


@dataclass(frozen=True)
class SessionSpec:
    role: Role
    system_prompt: str
    output_schema: str
    temperature: float = 0.0

    def __post_init__(self):
        if not self.system_prompt.strip():
            raise ValueError("system_prompt must be non-empty")
        if self.output_schema not in SCHEMAS:
            raise ValueError(f"unknown output schema {self.output_schema!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class StructuredResponse:
    role: Role
    payload: dict[str, Any]
    raw_text: str


def _read_prompt(role: Role, prompts_dir: Optional[Path]) -> str:
    filename = f"{role.value}.txt"
    if prompts_dir is not None:
        override = Path(prompts_dir) / filename
        if override.is_file():
            return override.read_text(encoding="utf-8")
    return resources.files("refpt.prompts").joinpath(filename).read_text(encoding="utf-8")


def default_specs(prompts_dir: Optional[Path] = None) -> dict[Role, SessionSpec]:
    """Build the five session specs, preferring prompt files from prompts_dir."""
    return {
        role: SessionSpec(
            role=role,
            system_prompt=_read_prompt(role, prompts_dir),
            output_schema=ROLE_SCHEMA_ID[role],
        )
        for role in Role
    }
