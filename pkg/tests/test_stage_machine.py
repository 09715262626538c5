"""Stage machine: transition relation, stall rule, trace bookkeeping."""

from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracle import GOALS, mirror_step
from refpt.errors import AmbiguousEvent, TerminalStepAttempt
from refpt.stage_machine import (
    MAX_STALL,
    PtEvent,
    Stage,
    StageMachineState,
    is_terminal,
    step,
)


def ev(**kwargs) -> PtEvent:
    return PtEvent(**kwargs)


def state(stage=Stage.INFORMATION_GATHERING, flags=0, total=3, stall=0):
    return StageMachineState(flags_total=total, current=stage,
                             stall_counter=stall, flags_captured=flags)


def test_initial_state_defaults():
    s = StageMachineState(flags_total=6)
    assert s.current is Stage.INFORMATION_GATHERING
    assert s.stall_counter == 0 and s.flags_captured == 0 and s.trace == ()


def test_happy_path_one_flag():
    s = StageMachineState(flags_total=1)
    seq = [
        (ev(gathered_information=True), Stage.VULNERABILITY_IDENTIFICATION),
        (ev(identified_vulnerability=True), Stage.EXPLOITATION),
        (ev(exploited=True), Stage.POST_EXPLOITATION),
        (ev(post_exploited=True), Stage.CAPTURE_THE_FLAG),
        (ev(flag_captured=True), Stage.DOCUMENTATION),
        (ev(documented=True), Stage.TERMINAL),
    ]
    for event, expected in seq:
        s, transitioned = step(s, event)
        assert transitioned
        assert s.current is expected
        assert s.stall_counter == 0
    assert s.flags_captured == 1
    assert len(s.trace) == 6


def test_documentation_restarts_until_flags_complete():
    s = state(Stage.DOCUMENTATION, flags=1, total=3)
    s, transitioned = step(s, ev(documented=True))
    assert transitioned and s.current is Stage.INFORMATION_GATHERING

    s = state(Stage.DOCUMENTATION, flags=3, total=3)
    s, transitioned = step(s, ev(documented=True))
    assert transitioned and s.current is Stage.TERMINAL


def test_capture_increments_flags():
    s = state(Stage.CAPTURE_THE_FLAG, flags=1, total=3)
    s, _ = step(s, ev(flag_captured=True))
    assert s.current is Stage.DOCUMENTATION and s.flags_captured == 2
    s2 = state(Stage.CAPTURE_THE_FLAG, flags=1, total=3)
    s2, transitioned = step(s2, ev(flag_captured=False))
    assert not transitioned and s2.flags_captured == 1


def test_vulnerability_regression_needs_both_signals():
    base = state(Stage.VULNERABILITY_IDENTIFICATION)
    nxt, transitioned = step(base, ev(identified_vulnerability=False,
                                      gathered_information=True))
    assert not transitioned and nxt.current is Stage.VULNERABILITY_IDENTIFICATION

    nxt, transitioned = step(base, ev(identified_vulnerability=False,
                                      gathered_information=False))
    assert transitioned and nxt.current is Stage.INFORMATION_GATHERING

    with pytest.raises(AmbiguousEvent) as excinfo:
        step(base, ev(identified_vulnerability=False))
    assert excinfo.value.signal == "gathered_information"


def test_irrelevant_signals_ignored():
    s = state(Stage.INFORMATION_GATHERING)
    nxt, transitioned = step(s, ev(gathered_information=True, documented=False,
                                   flag_captured=False))
    assert transitioned and nxt.current is Stage.VULNERABILITY_IDENTIFICATION


def test_ambiguous_event_names_stage_and_signal():
    with pytest.raises(AmbiguousEvent) as excinfo:
        step(state(Stage.EXPLOITATION), ev(gathered_information=True))
    assert excinfo.value.stage == "exploitation"
    assert excinfo.value.signal == "exploited"


def test_event_must_resolve_something():
    with pytest.raises(ValueError):
        PtEvent()


def test_event_json_round_trip():
    e = ev(gathered_information=True, exploited=False)
    doc = e.to_json()
    assert doc == {"gathered_information": "achieved", "exploited": "not_achieved"}
    assert PtEvent.from_json(doc) == e
    with pytest.raises(ValueError):
        PtEvent.from_json({"exploited": "perhaps"})


def test_stall_counter_and_forced_terminal():
    s = state(Stage.EXPLOITATION)
    for i in range(MAX_STALL - 1):
        s, transitioned = step(s, ev(exploited=False))
        assert not transitioned
        assert s.stall_counter == i + 1
        assert s.current is Stage.EXPLOITATION
    s, transitioned = step(s, ev(exploited=False))
    assert not transitioned
    assert s.current is Stage.TERMINAL
    assert s.stall_counter == MAX_STALL


def test_transition_resets_stall():
    s = state(Stage.EXPLOITATION, stall=4)
    s, transitioned = step(s, ev(exploited=True))
    assert transitioned and s.stall_counter == 0


def test_terminal_is_absorbing():
    s = state(Stage.TERMINAL)
    assert is_terminal(s)
    with pytest.raises(TerminalStepAttempt):
        step(s, ev(documented=True))


def test_state_validation():
    with pytest.raises(ValueError):
        StageMachineState(flags_total=0)
    with pytest.raises(ValueError):
        StageMachineState(flags_total=2, flags_captured=3)
    with pytest.raises(ValueError):
        StageMachineState(flags_total=2, stall_counter=MAX_STALL + 1)


def test_state_json_round_trip():
    s = StageMachineState(flags_total=2)
    s, _ = step(s, ev(gathered_information=True))
    s, _ = step(s, ev(identified_vulnerability=False, gathered_information=True))
    doc = s.to_json()
    assert doc["stage"] == "vulnerability_identification"
    assert doc["stall"] == 1
    assert StageMachineState.from_json(doc) == s


TRISTATE = ("achieved", "not_achieved", "unknown")


def all_events():
    """Every 3^6 assignment of the six goal signals."""
    for combo in itertools.product(TRISTATE, repeat=len(GOALS)):
        yield dict(zip(GOALS, combo))


def test_full_relation_matches_mirror():
    """Exhaustive stage x event sweep against the independent table."""
    total = 3
    checked = 0
    for stage in Stage:
        if stage is Stage.TERMINAL:
            continue
        flag_options = [0, total - 1] if stage is Stage.CAPTURE_THE_FLAG \
            else [0, total - 1, total]
        for flags in flag_options:
            for event_doc in all_events():
                expected = mirror_step(stage.value, event_doc, flags, total)
                known = {k: v for k, v in event_doc.items() if v != "unknown"}
                s = state(stage, flags=flags, total=total)
                if not known:
                    with pytest.raises(ValueError):
                        PtEvent.from_json(event_doc)
                    continue
                event = PtEvent.from_json(event_doc)
                if expected[0] == "ambiguous":
                    with pytest.raises(AmbiguousEvent) as excinfo:
                        step(s, event)
                    assert excinfo.value.signal == expected[1]
                else:
                    exp_stage, exp_flags, exp_transitioned = expected
                    nxt, transitioned = step(s, event)
                    assert transitioned == exp_transitioned
                    assert nxt.flags_captured == exp_flags
                    if exp_transitioned:
                        assert nxt.current.value == exp_stage
                        assert nxt.stall_counter == 0
                    else:
                        # non-transition from stall 0 can never hit the cap
                        assert nxt.current.value == exp_stage
                        assert nxt.stall_counter == 1
                checked += 1
    assert checked > 10000


@st.composite
def event_strategy(draw):
    kwargs = {}
    for goal in GOALS:
        kwargs[goal] = draw(st.sampled_from([True, False, None]))
    if all(v is None for v in kwargs.values()):
        kwargs["gathered_information"] = draw(st.sampled_from([True, False]))
    return PtEvent(**kwargs)


@settings(max_examples=200, deadline=None)
@given(st.lists(event_strategy(), min_size=1, max_size=60),
       st.integers(min_value=1, max_value=4))
def test_machine_invariants_over_random_runs(events, total):
    s = StageMachineState(flags_total=total)
    for event in events:
        if is_terminal(s):
            break
        before = s
        try:
            s, transitioned = step(s, event)
        except AmbiguousEvent:
            continue
        assert 0 <= s.stall_counter <= MAX_STALL
        assert 0 <= s.flags_captured <= total
        assert len(s.trace) == len(before.trace) + 1
        if transitioned:
            assert s.current is not before.current
            assert s.stall_counter == 0
        else:
            assert s.stall_counter == before.stall_counter + 1 or (
                s.current is Stage.TERMINAL)
        # flags only move by one capture at a time
        assert s.flags_captured - before.flags_captured in (0, 1)
