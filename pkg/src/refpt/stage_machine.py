"""Seven-stage progress tracker for a penetration-testing engagement.

The engagement moves through six working stages plus a terminal stage:

    information_gathering -> vulnerability_identification -> exploitation
    -> post_exploitation -> capture_the_flag -> documentation -> (cycle)

Each working stage has one goal signal. When the signal for the current
stage is achieved the machine advances; when it is explicitly not achieved
the machine self-loops, with one exception: at vulnerability_identification
a report that previously gathered information is also unusable drops the
machine back to information_gathering.

Documenting a flag normally restarts the cycle at information_gathering;
once the last flag is tallied, documenting instead terminates the run.
Five consecutive steps without a stage change also terminate the run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from .errors import AmbiguousEvent, TerminalStepAttempt

MAX_STALL = 5


class Stage(enum.Enum):
    INFORMATION_GATHERING = "information_gathering"
    VULNERABILITY_IDENTIFICATION = "vulnerability_identification"
    EXPLOITATION = "exploitation"
    POST_EXPLOITATION = "post_exploitation"
    CAPTURE_THE_FLAG = "capture_the_flag"
    DOCUMENTATION = "documentation"
    TERMINAL = "terminal"

    @property
    def number(self) -> int:
        """1-based position in the stage order (useful for timelines)."""
        return _STAGE_ORDER.index(self) + 1

    @property
    def description(self) -> str:
        return _DESCRIPTIONS[self]


_STAGE_ORDER = list(Stage)

_DESCRIPTIONS = {
    Stage.INFORMATION_GATHERING: "Information Gathering",
    Stage.VULNERABILITY_IDENTIFICATION: "Vulnerability Identification",
    Stage.EXPLOITATION: "Exploitation",
    Stage.POST_EXPLOITATION: "Post-Exploitation",
    Stage.CAPTURE_THE_FLAG: "Capture the Flag",
    Stage.DOCUMENTATION: "Documentation",
    Stage.TERMINAL: "Terminal Process",
}

# Goal signal consulted first at each working stage.
GOAL_SIGNAL = {
    Stage.INFORMATION_GATHERING: "gathered_information",
    Stage.VULNERABILITY_IDENTIFICATION: "identified_vulnerability",
    Stage.EXPLOITATION: "exploited",
    Stage.POST_EXPLOITATION: "post_exploited",
    Stage.CAPTURE_THE_FLAG: "flag_captured",
    Stage.DOCUMENTATION: "documented",
}

SIGNAL_NAMES = (
    "gathered_information",
    "identified_vulnerability",
    "exploited",
    "post_exploited",
    "flag_captured",
    "documented",
)


def stage_description(stage: Stage) -> str:
    """Human-readable stage goal, used as the stage text in retrieval queries."""
    return stage.description


@dataclass(frozen=True)
class PtEvent:
    """Tri-state goal signals extracted from the session logs.

    True = achieved, False = not achieved, None = unknown. At least one
    signal must be known; signals irrelevant to the current stage are
    ignored by step().
    """

    gathered_information: Optional[bool] = None
    identified_vulnerability: Optional[bool] = None
    exploited: Optional[bool] = None
    post_exploited: Optional[bool] = None
    flag_captured: Optional[bool] = None
    documented: Optional[bool] = None

    def __post_init__(self):
        if all(getattr(self, name) is None for name in SIGNAL_NAMES):
            raise ValueError("event must resolve at least one signal")

    def to_json(self) -> dict[str, str]:
        return {
            name: _TRISTATE_OUT[getattr(self, name)]
            for name in SIGNAL_NAMES
            if getattr(self, name) is not None
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> "PtEvent":
        kwargs = {}
        for name in SIGNAL_NAMES:
            raw = payload.get(name, "unknown")
            if raw not in _TRISTATE_IN:
                raise ValueError(f"bad signal value for {name}: {raw!r}")
            kwargs[name] = _TRISTATE_IN[raw]
        return cls(**kwargs)


_TRISTATE_OUT = {True: "achieved", False: "not_achieved"}
_TRISTATE_IN = {"achieved": True, "not_achieved": False, "unknown": None}


@dataclass(frozen=True)
class StageMachineState:
    """Immutable machine snapshot; step() returns a new state."""

    flags_total: int
    current: Stage = Stage.INFORMATION_GATHERING
    stall_counter: int = 0
    flags_captured: int = 0
    trace: tuple = field(default_factory=tuple)  # ((event json, stage value), ...)

    def __post_init__(self):
        if self.flags_total < 1:
            raise ValueError("flags_total must be >= 1")
        if not 0 <= self.flags_captured <= self.flags_total:
            raise ValueError("flags_captured out of range")
        if not 0 <= self.stall_counter <= MAX_STALL:
            raise ValueError("stall_counter out of range")

    def to_json(self) -> dict[str, Any]:
        return {
            "stage": self.current.value,
            "stall": self.stall_counter,
            "flags": {"captured": self.flags_captured, "total": self.flags_total},
            "trace": [list(item) for item in self.trace],
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> "StageMachineState":
        return cls(
            flags_total=payload["flags"]["total"],
            current=Stage(payload["stage"]),
            stall_counter=payload["stall"],
            flags_captured=payload["flags"]["captured"],
            trace=tuple((entry[0], entry[1]) for entry in payload["trace"]),
        )


def is_terminal(state: StageMachineState) -> bool:
    return state.current is Stage.TERMINAL


def _need(stage: Stage, event: PtEvent, signal: str) -> bool:
    value = getattr(event, signal)
    if value is None:
        raise AmbiguousEvent(stage.value, signal)
    return value


def _successor(state: StageMachineState, event: PtEvent) -> tuple[Stage, int]:
    """Target stage and new flag tally for one event, before stall accounting."""
    stage = state.current
    flags = state.flags_captured

    if stage is Stage.INFORMATION_GATHERING:
        return (Stage.VULNERABILITY_IDENTIFICATION, flags) if _need(
            stage, event, "gathered_information"
        ) else (stage, flags)

    if stage is Stage.VULNERABILITY_IDENTIFICATION:
        if _need(stage, event, "identified_vulnerability"):
            return Stage.EXPLOITATION, flags
        # Vulnerability not found: stay if gathered information still holds,
        # otherwise fall back to information gathering.
        if _need(stage, event, "gathered_information"):
            return stage, flags
        return Stage.INFORMATION_GATHERING, flags

    if stage is Stage.EXPLOITATION:
        return (Stage.POST_EXPLOITATION, flags) if _need(stage, event, "exploited") else (stage, flags)

    if stage is Stage.POST_EXPLOITATION:
        return (Stage.CAPTURE_THE_FLAG, flags) if _need(stage, event, "post_exploited") else (stage, flags)

    if stage is Stage.CAPTURE_THE_FLAG:
        if _need(stage, event, "flag_captured"):
            return Stage.DOCUMENTATION, flags + 1
        return stage, flags

    if stage is Stage.DOCUMENTATION:
        if _need(stage, event, "documented"):
            # Flag-completion check comes before the normal restart edge.
            if flags == state.flags_total:
                return Stage.TERMINAL, flags
            return Stage.INFORMATION_GATHERING, flags
        return stage, flags

    raise AssertionError(f"unhandled stage {stage}")


def step(state: StageMachineState, event: PtEvent) -> tuple[StageMachineState, bool]:
    """Apply one event; returns (new state, whether the stage changed).

    A run of MAX_STALL consecutive non-changing events forces the terminal
    stage; that forced move is not reported as a transition.
    """
    if is_terminal(state):
        raise TerminalStepAttempt(f"machine already terminal after {len(state.trace)} events")

    target, flags = _successor(state, event)
    transitioned = target is not state.current

    if transitioned:
        stall = 0
    else:
        stall = state.stall_counter + 1
        if stall >= MAX_STALL:
            stall = MAX_STALL
            target = Stage.TERMINAL

    new_state = replace(
        state,
        current=target,
        stall_counter=stall,
        flags_captured=flags,
        trace=state.trace + ((event.to_json(), target.value),),
    )
    return new_state, transitioned
