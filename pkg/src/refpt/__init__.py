"""refpt: human-in-the-loop penetration-testing orchestration.

A stage machine tracks engagement progress, a three-tier knowledge store
supplies tactics/techniques/actions by similarity, LLM sessions extract
events, pick actions, write guidance, and judge results — and the human
operator stays in the loop for every command that actually runs.
"""

__version__ = "0.1.0"

from .stage_machine import (  # noqa: F401
    MAX_STALL,
    PtEvent,
    Stage,
    StageMachineState,
    is_terminal,
    step,
)
