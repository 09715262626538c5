"""The three pipeline stages: navigation, guidance generation, reflection.

Navigation turns an operator instruction into a knowledge selection (tactic,
technique, action) after stepping the stage machine on the extracted progress
event. Generation writes operator guidance for that selection — or, when a
failure streak is active, corrected guidance from the failure log. Reflection
scores the execution result and routes the loop.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import SchemaViolation
from .knowledge_base import KnowledgeRecord, KnowledgeStore, RetrievalResult
from .llm_gateway import Gateway, Role
from .splice import splice
from .stage_machine import PtEvent, Stage, StageMachineState, is_terminal, step

GENERATED_ID_PREFIX = "GEN-"

# --- experience logs --------------------------------------------------------


def _one_line(text: str) -> str:
    """Collapse a result blob to a single line for the recency marker."""
    return re.sub(r"\s+", " ", text).strip()


@dataclass(frozen=True)
class SuccessExperience:
    """One rewarded iteration: (q, tau, c, u, a, r, o) with r always 2."""

    q: str
    tau: Stage
    c: str
    u: str
    a: str
    r: int
    o: str

    def __post_init__(self):
        if self.r != 2:
            raise ValueError("success experiences carry r=2")
        for name in ("q", "c", "u", "a", "o"):
            if not getattr(self, name):
                raise ValueError(f"success experience field {name!r} must be non-empty")

    def to_json(self) -> dict[str, Any]:
        return {"q": self.q, "tau": self.tau.value, "c": self.c,
                "u": self.u, "a": self.a, "r": self.r, "o": self.o}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "SuccessExperience":
        return cls(q=doc["q"], tau=Stage(doc["tau"]), c=doc["c"], u=doc["u"],
                   a=doc["a"], r=doc["r"], o=doc["o"])


@dataclass(frozen=True)
class FailureExperience:
    """One failed iteration: (q, tau, c, u, a, r, g, o, phi) with r in {0, 1}."""

    q: str
    tau: Stage
    c: str
    u: str
    a: str
    r: int
    g: str
    o: str
    phi: str

    def __post_init__(self):
        if self.r not in (0, 1):
            raise ValueError("failure experiences carry r=0 or r=1")
        for name in ("q", "c", "u", "a", "g", "o", "phi"):
            if not getattr(self, name):
                raise ValueError(f"failure experience field {name!r} must be non-empty")

    def to_json(self) -> dict[str, Any]:
        return {"q": self.q, "tau": self.tau.value, "c": self.c, "u": self.u,
                "a": self.a, "r": self.r, "g": self.g, "o": self.o, "phi": self.phi}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "FailureExperience":
        return cls(q=doc["q"], tau=Stage(doc["tau"]), c=doc["c"], u=doc["u"],
                   a=doc["a"], r=doc["r"], g=doc["g"], o=doc["o"], phi=doc["phi"])


class _Log:
    _item_type: type

    def __init__(self):
        self._entries: list = []

    def append(self, exp) -> None:
        if not isinstance(exp, self._item_type):
            raise TypeError(f"expected {self._item_type.__name__}, got {type(exp).__name__}")
        self._entries.append(exp)

    @property
    def entries(self) -> tuple:
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def to_json(self) -> list[dict[str, Any]]:
        return [e.to_json() for e in self._entries]


class SuccessLog(_Log):
    """Append-only record of rewarded iterations (the Y log)."""
    _item_type = SuccessExperience


class FailureLog(_Log):
    """Failed iterations for the active streak; cleared on the next success."""
    _item_type = FailureExperience

    def clear(self) -> None:
        self._entries.clear()


def format_log(success_log: SuccessLog, failure_log: FailureLog) -> str:
    """Render the active log for prompts: F while a failure streak runs, else Y.

    The last line restates the newest result on a single line so a reader (or
    a matcher) can find the most recent evidence without parsing the blocks.
    """
    entries = failure_log.entries if failure_log else success_log.entries
    if not entries:
        return "(no recorded experiences)"
    blocks = []
    for i, exp in enumerate(entries, start=1):
        kind = "failure" if isinstance(exp, FailureExperience) else "success"
        lines = [
            f"Experience {i} — {kind} (r={exp.r})",
            f"INSTRUCTION: {exp.q}",
            f"STAGE: {exp.tau.description}",
            f"TACTIC: {exp.c}",
            f"TECHNIQUE: {exp.u}",
            f"ACTION: {exp.a}",
        ]
        if isinstance(exp, FailureExperience):
            lines.append(f"GUIDANCE: {_one_line(exp.g)}")
        lines.append(f"RESULT:\n{exp.o}")
        if isinstance(exp, FailureExperience):
            lines.append(f"REASON: {exp.phi}")
        blocks.append("\n".join(lines))
    rendered = "\n\n".join(blocks)
    return rendered + f"\n\nMOST RECENT RESULT: {_one_line(entries[-1].o)}"


# --- navigation -------------------------------------------------------------


@dataclass(frozen=True)
class NavigationOutcome:
    """Knowledge selection for one iteration."""

    tau: Stage
    tactic_id: str
    technique_id: str
    action_id: str
    action_text: str
    k: int
    candidates: tuple[str, ...]


@dataclass(frozen=True)
class NavigationResult:
    event: PtEvent
    machine: StageMachineState
    transitioned: bool
    outcome: Optional[NavigationOutcome]  # None when the step landed terminal
    retrieval: Optional[RetrievalResult]


def _candidate_block(result: RetrievalResult) -> str:
    if not result.actions:
        return "(none — propose a new abstract action with k=1)"
    return "\n".join(f"- {a.record_id}: {a.name} — {a.description}" for a in result.actions)


def navigate(q: str, success_log: SuccessLog, failure_log: FailureLog,
             machine: StageMachineState, store: KnowledgeStore,
             gateway: Gateway, iteration: int) -> NavigationResult:
    """One navigation pass: extract the event, step the machine, pick an action."""
    log_text = format_log(success_log, failure_log)
    extracted = gateway.complete_structured(
        Role.EVENT_EXTRACTOR,
        f"ENGAGEMENT LOG:\n{log_text}\n\n"
        "Judge the goal signals for the most recent execution.",
    )
    try:
        event = PtEvent.from_json(extracted.payload)
    except ValueError as exc:
        raise SchemaViolation(f"event payload invalid: {exc}") from exc

    stepped, transitioned = step(machine, event)
    if is_terminal(stepped):
        return NavigationResult(event=event, machine=stepped,
                                transitioned=transitioned, outcome=None, retrieval=None)

    retrieval = store.retrieve(q, stepped.current.description)
    tactic, technique = retrieval.tactic, retrieval.technique
    selection = gateway.complete_structured(
        Role.ACTION_SELECTOR,
        "\n".join([
            f"INSTRUCTION: {q}",
            f"STAGE: {stepped.current.description}",
            f"TACTIC: {tactic.record_id} {tactic.name}",
            f"TECHNIQUE: {technique.record_id} {technique.name}",
            "CANDIDATE ACTIONS:",
            _candidate_block(retrieval),
            "ENGAGEMENT LOG:",
            log_text,
        ]),
    )
    payload = selection.payload
    candidate_ids = tuple(a.record_id for a in retrieval.actions)
    if payload["k"] == 0:
        action_id = payload["action_id"]
        if action_id not in candidate_ids:
            raise SchemaViolation(
                f"selector chose {action_id!r}, not among candidates {list(candidate_ids)}")
        chosen = store.lookup(action_id)
        action_text = f"{chosen.name}: {chosen.description}"
        k = 0
    else:
        action_id = f"{GENERATED_ID_PREFIX}{iteration}"
        action_text = payload["new_action_text"]
        k = 1
    outcome = NavigationOutcome(
        tau=stepped.current, tactic_id=tactic.record_id,
        technique_id=technique.record_id, action_id=action_id,
        action_text=action_text, k=k, candidates=candidate_ids,
    )
    return NavigationResult(event=event, machine=stepped, transitioned=transitioned,
                            outcome=outcome, retrieval=retrieval)


# --- guidance generation ----------------------------------------------------


@dataclass(frozen=True)
class GuidanceStep:
    explanation: str
    command: Optional[str] = None
    observe_only: bool = False

    def to_json(self) -> dict[str, Any]:
        return {"explanation": self.explanation, "command": self.command,
                "observe_only": self.observe_only}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "GuidanceStep":
        return cls(explanation=doc["explanation"], command=doc.get("command"),
                   observe_only=bool(doc.get("observe_only", False)))


@dataclass(frozen=True)
class GuidancePackage:
    steps: tuple[GuidanceStep, ...]
    reflective: bool  # True when rebuilt from the failure log

    def to_json(self) -> dict[str, Any]:
        return {"steps": [s.to_json() for s in self.steps], "reflective": self.reflective}

    @classmethod
    def from_json(cls, doc: dict[str, Any]) -> "GuidancePackage":
        return cls(steps=tuple(GuidanceStep.from_json(s) for s in doc["steps"]),
                   reflective=bool(doc["reflective"]))


def render_guidance(package: GuidancePackage) -> str:
    """Flatten guidance into numbered operator text (also the g of log tuples)."""
    lines = []
    for i, gstep in enumerate(package.steps, start=1):
        lines.append(f"{i}. {gstep.explanation}")
        if gstep.command:
            lines.append(f"   $ {gstep.command}")
    return "\n".join(lines)


def generate(q: str, tau: Stage, tactic: KnowledgeRecord, technique: KnowledgeRecord,
             action_text: str, failure_log: FailureLog, gateway: Gateway) -> GuidancePackage:
    """Produce guidance; a non-empty failure log switches to corrective mode."""
    if failure_log:
        prompt = (
            "FAILURE LOG:\n"
            + format_log(SuccessLog(), failure_log)
            + "\n\nProduce corrected guidance that avoids every recorded failure reason."
        )
        reflective = True
    else:
        prompt = splice(
            INSTRUCTION=q,
            STAGE=tau.description,
            TACTIC=f"{tactic.record_id} {tactic.name}: {tactic.description}",
            TECHNIQUE=f"{technique.record_id} {technique.name}: {technique.description}",
            ACTION=action_text,
        )
        reflective = False
    resp = gateway.complete_structured(Role.GUIDANCE_GENERATOR, prompt)
    steps = tuple(GuidanceStep.from_json(s) for s in resp.payload["steps"])
    return GuidancePackage(steps=steps, reflective=reflective)


# --- reflection -------------------------------------------------------------


class Route(enum.Enum):
    NEXT_ITERATION = "next_iteration"
    GENERATOR = "generator"
    NAVIGATOR = "navigator"


_ROUTE_FOR_REWARD = {2: Route.NEXT_ITERATION, 1: Route.GENERATOR, 0: Route.NAVIGATOR}


@dataclass(frozen=True)
class ReflectionOutcome:
    r: int
    phi: Optional[str]
    route: Route
    rationale: str = ""


def reflect(q: str, tau: Stage, tactic: KnowledgeRecord, technique: KnowledgeRecord,
            action_id: str, action_text: str, guidance: GuidancePackage, o: str,
            success_log: SuccessLog, failure_log: FailureLog,
            gateway: Gateway) -> ReflectionOutcome:
    """Score one execution, append the matching experience, pick the route."""
    g_text = render_guidance(guidance)
    judged = gateway.complete_structured(
        Role.REWARD_JUDGE,
        splice(
            STAGE=tau.description,
            TACTIC=f"{tactic.record_id} {tactic.name}",
            TECHNIQUE=f"{technique.record_id} {technique.name}",
            ACTION=action_text,
            GUIDANCE=g_text,
            RESULT=o,
        ),
    )
    r = judged.payload["r"]
    rationale = judged.payload.get("rationale", "")

    if r == 2:
        success_log.append(SuccessExperience(
            q=q, tau=tau, c=tactic.record_id, u=technique.record_id,
            a=action_id, r=2, o=o))
        failure_log.clear()
        return ReflectionOutcome(r=2, phi=None, route=Route.NEXT_ITERATION,
                                 rationale=rationale)

    analysed = gateway.complete_structured(
        Role.FAILURE_ANALYST,
        splice(INSTRUCTION=q, ACTION=action_text, RESULT=o),
    )
    phi = analysed.payload["reason"]
    failure_log.append(FailureExperience(
        q=q, tau=tau, c=tactic.record_id, u=technique.record_id,
        a=action_id, r=r, g=g_text, o=o, phi=phi))
    return ReflectionOutcome(r=r, phi=phi, route=_ROUTE_FOR_REWARD[r],
                             rationale=rationale)
