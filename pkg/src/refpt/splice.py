"""Canonical text splicing for prompts and retrieval queries.

All places that join instruction/stage/knowledge text into one string use the
same labeled-section layout so that retrieval queries and session prompts are
reproducible across runs.
"""

from __future__ import annotations

# Section order is fixed; callers pass only the sections they have.
_SECTION_ORDER = (
    "INSTRUCTION",
    "STAGE",
    "TACTIC",
    "TECHNIQUE",
    "ACTION",
    "GUIDANCE",
    "RESULT",
)


def splice(**sections: str) -> str:
    """Join named text sections into the canonical labeled layout.

    Unknown section names are rejected so typos do not silently produce a
    different query text.
    """
    unknown = set(sections) - set(_SECTION_ORDER)
    if unknown:
        raise ValueError(f"unknown splice sections: {sorted(unknown)}")
    parts = [f"{name}: {sections[name]}" for name in _SECTION_ORDER if name in sections]
    return "\n".join(parts)
