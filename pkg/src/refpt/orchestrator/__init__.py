"""Session orchestration: the instruction/result loop, transcripts, HTTP API."""

from .config import BackendConfig, SessionConfig, load_config
from .driver import execute_guidance, load_plan, run_plan
from .session import (
    InstructionOutcome,
    MetricsAccumulator,
    Occupancy,
    Phase,
    ResultOutcome,
    Session,
    build_gateway,
)
from .transcript import TranscriptWriter, canonical_line, read_transcript, replay_session

__all__ = [
    "BackendConfig", "SessionConfig", "load_config",
    "Session", "Phase", "InstructionOutcome", "ResultOutcome",
    "MetricsAccumulator", "Occupancy", "build_gateway",
    "TranscriptWriter", "canonical_line", "read_transcript", "replay_session",
    "run_plan", "load_plan", "execute_guidance",
]
