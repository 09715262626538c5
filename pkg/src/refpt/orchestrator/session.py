"""Session lifecycle: the instruction/result loop around the pipeline.

A session alternates between two phases. submit_instruction runs navigation
(event extraction + machine step + retrieval + action choice) and guidance
generation, holding the stepped machine as *pending*; submit_result scores
the execution, commits the pending machine state, updates the logs, and
routes — possibly handing back corrected guidance without leaving the
result phase.
"""

from __future__ import annotations

import enum
import logging
import threading
from dataclasses import dataclass, field
from typing import Any, Optional

from .. import agents
from ..agents import (
    FailureLog,
    GuidancePackage,
    NavigationResult,
    Route,
    SuccessLog,
)
from ..errors import WrongPhase
from ..knowledge_base import KnowledgeStore
from ..llm_gateway import Gateway, RemoteBackend, ScriptedBackend, default_specs
from ..stage_machine import Stage, StageMachineState, is_terminal
from .config import SessionConfig
from .transcript import TranscriptWriter

logger = logging.getLogger(__name__)


class Phase(enum.Enum):
    AWAITING_INSTRUCTION = "awaiting_instruction"
    AWAITING_RESULT = "awaiting_result"
    FINISHED = "finished"


# --- metrics ----------------------------------------------------------------


@dataclass
class Occupancy:
    """One contiguous visit to a stage; the unit success rates average over."""

    stage: Stage
    attempts: int = 0
    resolved: bool = False
    success: bool = False


class MetricsAccumulator:
    """Occupancy bookkeeping: a stage visit succeeds when left by transition.

    A successful occupancy with n attempts contributes 1/n; an occupancy the
    session stalled or ended in contributes 0; occupancies that never saw an
    attempt (entered and left purely by navigation) are excluded.
    """

    def __init__(self, initial: Stage = Stage.INFORMATION_GATHERING):
        self.occupancies: list[Occupancy] = [Occupancy(initial)]

    def commit_step(self, new_stage: Stage, transitioned: bool) -> None:
        current = self.occupancies[-1]
        if transitioned:
            current.resolved = True
            current.success = True
            if new_stage is not Stage.TERMINAL:
                self.occupancies.append(Occupancy(new_stage))
        elif new_stage is Stage.TERMINAL:  # stalled out
            current.resolved = True
            current.success = False

    def record_attempt(self, stage: Stage) -> None:
        current = self.occupancies[-1]
        if current.resolved or current.stage is not stage:
            raise AssertionError(
                f"attempt at {stage.value} but open occupancy is "
                f"{current.stage.value} (resolved={current.resolved})")
        current.attempts += 1

    def abandon_open(self) -> None:
        """Close the open occupancy as unresolved-failed (session ended on it)."""
        current = self.occupancies[-1]
        if not current.resolved:
            current.resolved = True
            current.success = False

    def per_stage(self) -> dict[str, dict[str, Any]]:
        out: dict[str, dict[str, Any]] = {}
        for stage in Stage:
            if stage is Stage.TERMINAL:
                continue
            rated = [o for o in self.occupancies
                     if o.stage is stage and o.resolved and o.attempts > 0]
            rates = [(1.0 / o.attempts) if o.success else 0.0 for o in rated]
            out[stage.value] = {
                "rate": (sum(rates) / len(rates)) if rates else None,
                "occupancies": len(rated),
                "attempts": sum(o.attempts for o in self.occupancies if o.stage is stage),
                "successes": sum(1 for o in rated if o.success),
            }
        return out

    @property
    def attempts_total(self) -> int:
        return sum(o.attempts for o in self.occupancies)


# --- outcomes handed back to the operator -----------------------------------


@dataclass(frozen=True)
class InstructionOutcome:
    t: int
    terminal: bool
    stage: Stage
    stall: int
    flags_captured: int
    event: dict[str, str]
    transitioned: bool
    tactic: Optional[dict[str, Any]] = None
    technique: Optional[dict[str, Any]] = None
    action_id: Optional[str] = None
    action_text: Optional[str] = None
    k: Optional[int] = None
    candidates: tuple[str, ...] = ()
    guidance: Optional[GuidancePackage] = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "t": self.t,
            "terminal": self.terminal,
            "stage": self.stage.value,
            "stall": self.stall,
            "flags_captured": self.flags_captured,
            "event": self.event,
            "transitioned": self.transitioned,
        }
        if not self.terminal:
            doc.update({
                "tactic": self.tactic,
                "technique": self.technique,
                "action_id": self.action_id,
                "action_text": self.action_text,
                "k": self.k,
                "candidates": list(self.candidates),
                "guidance": self.guidance.to_json() if self.guidance else None,
            })
        return doc


@dataclass(frozen=True)
class ResultOutcome:
    t: int
    r: int
    phi: Optional[str]
    route: Route
    stage: Stage
    stall: int
    flags_captured: int
    finished: bool
    guidance: Optional[GuidancePackage] = None  # corrected guidance on the generator route

    def to_json(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "r": self.r,
            "phi": self.phi,
            "route": self.route.value,
            "stage": self.stage.value,
            "stall": self.stall,
            "flags_captured": self.flags_captured,
            "finished": self.finished,
            "guidance": self.guidance.to_json() if self.guidance else None,
        }


@dataclass
class _Pending:
    q: str
    nav: NavigationResult
    guidance: GuidancePackage
    committed: bool = False  # machine state already committed by a prior result


# --- session ----------------------------------------------------------------


def build_gateway(config: SessionConfig, store: KnowledgeStore) -> Gateway:
    specs = default_specs(config.prompts_dir)
    if config.backend.kind == "scripted":
        backend: Any = ScriptedBackend.from_file(config.backend.script_path)
    else:
        endpoint, model, token = config.backend.resolve_remote()
        backend = RemoteBackend(endpoint=endpoint, model=model, token=token,
                                timeout=config.backend.timeout)
    return Gateway(backend=backend, embedder=store.embedder, specs=specs)


class Session:
    """One engagement: a store, a gateway, logs, the machine, a transcript."""

    def __init__(self, config: SessionConfig, store: KnowledgeStore,
                 gateway: Gateway, transcript: TranscriptWriter):
        self.config = config
        self.session_id = config.session_id
        self.store = store
        self.gateway = gateway
        self.transcript = transcript
        self.t = 0
        self.machine = StageMachineState(flags_total=config.flags_total)
        self.success_log = SuccessLog()
        self.failure_log = FailureLog()
        self.phase = Phase.AWAITING_INSTRUCTION
        self.metrics_acc = MetricsAccumulator(self.machine.current)
        self.generated_actions: dict[str, str] = {}
        self.events: list[dict[str, Any]] = []
        self._pending: Optional[_Pending] = None
        self._lock = threading.RLock()

    # -- lifecycle -------------------------------------------------------

    @classmethod
    def start(cls, config: SessionConfig,
              store: Optional[KnowledgeStore] = None) -> "Session":
        if store is None:
            store = KnowledgeStore.load(config.store_path)
        if config.lambda_override is not None:
            store.lambda_threshold = config.lambda_override
        gateway = build_gateway(config, store)
        transcript = TranscriptWriter(config.transcript_path)
        session = cls(config, store, gateway, transcript)
        entry = {
            "type": "session_start",
            "session_id": session.session_id,
            "flags_total": config.flags_total,
            "lambda": store.lambda_threshold,
            "embedder": store.embedder.name,
            "backend_kind": config.backend.kind,
        }
        transcript.write(entry)
        session._push_event("session_started", entry)
        return session

    # -- protocol --------------------------------------------------------

    def submit_instruction(self, q: str) -> InstructionOutcome:
        with self._lock:
            if self.phase is not Phase.AWAITING_INSTRUCTION:
                raise WrongPhase(Phase.AWAITING_INSTRUCTION.value, self.phase.value)
            if not q or not q.strip():
                raise ValueError("instruction must be non-empty")
            self.t += 1
            try:
                self.gateway.reset_sessions()
                nav = agents.navigate(q, self.success_log, self.failure_log,
                                      self.machine, self.store, self.gateway,
                                      iteration=self.t)
                if nav.outcome is None:
                    return self._finish_terminal(q, nav)
                guidance = agents.generate(
                    q, nav.outcome.tau,
                    self.store.lookup(nav.outcome.tactic_id),
                    self.store.lookup(nav.outcome.technique_id),
                    nav.outcome.action_text, self.failure_log, self.gateway)
            except Exception:
                self.t -= 1  # roll the iteration back; session state untouched
                raise
            if nav.outcome.k == 1:
                self.generated_actions[nav.outcome.action_id] = nav.outcome.action_text
            self._pending = _Pending(q=q, nav=nav, guidance=guidance)
            self.phase = Phase.AWAITING_RESULT
            outcome = self._instruction_outcome(nav, guidance)
            entry = {"type": "instruction", "q": q, **outcome.to_json()}
            self.transcript.write(entry)
            self._push_event("instruction_accepted", entry)
            return outcome

    def _finish_terminal(self, q: str, nav: NavigationResult) -> InstructionOutcome:
        self.machine = nav.machine
        self.metrics_acc.commit_step(self.machine.current, nav.transitioned)
        self.phase = Phase.FINISHED
        outcome = InstructionOutcome(
            t=self.t, terminal=True, stage=self.machine.current,
            stall=self.machine.stall_counter,
            flags_captured=self.machine.flags_captured,
            event=nav.event.to_json(), transitioned=nav.transitioned)
        entry = {"type": "instruction", "q": q, **outcome.to_json()}
        self.transcript.write(entry)
        self._push_event("finished", entry)
        return outcome

    def _instruction_outcome(self, nav: NavigationResult,
                             guidance: GuidancePackage) -> InstructionOutcome:
        out = nav.outcome
        assert out is not None and nav.retrieval is not None
        tactic = nav.retrieval.tactic
        technique = nav.retrieval.technique
        return InstructionOutcome(
            t=self.t, terminal=False, stage=nav.machine.current,
            stall=nav.machine.stall_counter,
            flags_captured=nav.machine.flags_captured,
            event=nav.event.to_json(), transitioned=nav.transitioned,
            tactic={"id": tactic.record_id, "name": tactic.name},
            technique={"id": technique.record_id, "name": technique.name},
            action_id=out.action_id, action_text=out.action_text,
            k=out.k, candidates=out.candidates, guidance=guidance)

    def submit_result(self, o: str) -> ResultOutcome:
        with self._lock:
            if self.phase is not Phase.AWAITING_RESULT:
                raise WrongPhase(Phase.AWAITING_RESULT.value, self.phase.value)
            if not o or not o.strip():
                raise ValueError("result must be non-empty")
            pending = self._pending
            assert pending is not None
            out = pending.nav.outcome
            assert out is not None and pending.nav.retrieval is not None

            reflection = agents.reflect(
                q=pending.q, tau=out.tau,
                tactic=pending.nav.retrieval.tactic,
                technique=pending.nav.retrieval.technique,
                action_id=out.action_id, action_text=out.action_text,
                guidance=pending.guidance, o=o,
                success_log=self.success_log, failure_log=self.failure_log,
                gateway=self.gateway)

            if not pending.committed:
                self.machine = pending.nav.machine
                self.metrics_acc.commit_step(self.machine.current,
                                             pending.nav.transitioned)
                pending.committed = True
            self.metrics_acc.record_attempt(self.machine.current)

            new_guidance: Optional[GuidancePackage] = None
            if reflection.route is Route.GENERATOR:
                new_guidance = agents.generate(
                    pending.q, out.tau,
                    self.store.lookup(out.tactic_id),
                    self.store.lookup(out.technique_id),
                    out.action_text, self.failure_log, self.gateway)
                pending.guidance = new_guidance
            else:
                self._pending = None
                self.phase = Phase.AWAITING_INSTRUCTION

            finished = is_terminal(self.machine)
            if finished:  # defensive; terminal commits normally happen at navigation
                self.phase = Phase.FINISHED

            outcome = ResultOutcome(
                t=self.t, r=reflection.r, phi=reflection.phi,
                route=reflection.route, stage=self.machine.current,
                stall=self.machine.stall_counter,
                flags_captured=self.machine.flags_captured,
                finished=finished, guidance=new_guidance)
            entry = {"type": "result", "o": o, **outcome.to_json()}
            self.transcript.write(entry)
            self._push_event("result_scored", entry)
            return outcome

    # -- views -----------------------------------------------------------

    def metrics(self) -> dict[str, Any]:
        captured = self.machine.flags_captured
        total = self.machine.flags_total
        return {
            "per_stage": self.metrics_acc.per_stage(),
            "attempts_total": self.metrics_acc.attempts_total,
            "capture": {
                "captured": captured,
                "total": total,
                "rate": captured / total,
            },
            "finished": self.phase is Phase.FINISHED,
        }

    def logs_json(self) -> dict[str, Any]:
        return {
            "success": self.success_log.to_json(),
            "failure": self.failure_log.to_json(),
            "generated_actions": dict(self.generated_actions),
        }

    def snapshot(self) -> dict[str, Any]:
        with self._lock:
            pending = None
            stage = self.machine.current
            if self._pending is not None:
                nav = self._pending.nav
                stage = nav.machine.current
                out = nav.outcome
                pending = {
                    "q": self._pending.q,
                    "action_id": out.action_id,
                    "action_text": out.action_text,
                    "k": out.k,
                    "tactic": nav.retrieval.tactic.record_id,
                    "technique": nav.retrieval.technique.record_id,
                    "guidance": self._pending.guidance.to_json(),
                }
            return {
                "session_id": self.session_id,
                "phase": self.phase.value,
                "t": self.t,
                "stage": stage.value,
                "stage_label": stage.description,
                "committed_stage": self.machine.current.value,
                "stall": self.machine.stall_counter,
                "flags": {"captured": self.machine.flags_captured,
                          "total": self.machine.flags_total},
                "pending": pending,
                "metrics": self.metrics(),
            }

    # -- events ------------------------------------------------------------

    def _push_event(self, kind: str, data: dict[str, Any]) -> None:
        self.events.append({
            "seq": len(self.events) + 1,
            "event": kind,
            "data": data,
            "phase": self.phase.value,
        })

    def close(self) -> None:
        self.transcript.close()
