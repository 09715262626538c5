"""Scripted operator: drives a session from a plan file against a sim target.

The plan supplies the instruction for each iteration; execution results come
from running the guidance commands against the target, falling back to the
plan's manual notes for observe-only guidance (documentation steps and the
like).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Optional

from ..agents import GuidancePackage
from ..sim_target import ScriptedTarget
from .session import Phase, Session

PLAN_FORMAT = "refpt-plan/1"


def load_plan(path: str | Path) -> dict[str, Any]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != PLAN_FORMAT:
        raise ValueError(f"{path} is not a {PLAN_FORMAT} plan")
    return doc


def execute_guidance(target: ScriptedTarget, guidance: GuidancePackage) -> Optional[str]:
    """Run every command step against the target; None when nothing executes."""
    parts = []
    for gstep in guidance.steps:
        if gstep.command:
            parts.append(f"$ {gstep.command}\n{target.execute(gstep.command)}")
    return "\n".join(parts) if parts else None


def run_plan(session: Session, target: ScriptedTarget,
             plan: dict[str, Any]) -> Session:
    """Feed plan instructions through the session until it finishes."""
    for item in plan["instructions"]:
        if session.phase is Phase.FINISHED:
            break
        out = session.submit_instruction(item["q"])
        if out.terminal:
            break
        manuals = list(item.get("manual_results", []))
        guidance = out.guidance
        while session.phase is Phase.AWAITING_RESULT:
            assert guidance is not None
            o = execute_guidance(target, guidance)
            if o is None:
                if not manuals:
                    raise ValueError(
                        f"iteration {out.t}: observe-only guidance but the plan "
                        "has no manual_results left")
                o = manuals.pop(0)
            res = session.submit_result(o)
            guidance = res.guidance or guidance
    return session
