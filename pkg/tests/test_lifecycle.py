import pytest
from hypothesis import given, strategies as st

from manobench.errors import ClockDomainMismatch, InvalidValue, PhaseOrderViolation
from manobench.lifecycle import (
    ActionKind,
    LifecycleEvent,
    LifecyclePhase,
    LifecycleTimeline,
)

P = LifecyclePhase

CHAIN = (
    P.OnboardRequested,
    P.ImageTransferred,
    P.VmActive,
    P.InstantiateRequested,
    P.VnfConfigured,
    P.VnfOperational,
)


def ev(phase, t, instance="i1", action=None, kind=None):
    return LifecycleEvent(
        instance_id=instance, vnf_name="vX", phase=phase, timestamp_ns=t,
        action_id=action, action_kind=kind,
    )


class TestRecordEvent:
    def test_ordered_insert(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.OnboardRequested, 0))
        tl.record_event(ev(P.VmActive, 5))
        assert len(tl) == 2

    def test_out_of_order_phases_rejected(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.VmActive, 5))
        with pytest.raises(PhaseOrderViolation) as excinfo:
            tl.record_event(ev(P.OnboardRequested, 7))
        assert "i1" in str(excinfo.value)

    def test_action_pair_accepted(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.ActionExecuted, 1, action="a1",
                           kind=ActionKind.ScaleOut))
        tl.record_event(ev(P.ActionCompleted, 4, action="a1",
                           kind=ActionKind.ScaleOut))
        assert len(tl) == 2

    def test_action_completed_before_executed_rejected(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.ActionExecuted, 5, action="a1",
                           kind=ActionKind.Migrate))
        with pytest.raises(PhaseOrderViolation):
            tl.record_event(ev(P.ActionCompleted, 2, action="a1",
                               kind=ActionKind.Migrate))

    def test_equal_timestamps_allowed(self):
        # a zero-delay run stamps every phase at the same instant
        tl = LifecycleTimeline()
        for phase in CHAIN:
            tl.record_event(ev(phase, 0))
        assert [e.phase for e in tl.events] == list(CHAIN)

    def test_tie_break_is_insertion_order(self):
        tl = LifecycleTimeline()
        a = ev(P.OnboardRequested, 3, instance="a")
        b = ev(P.OnboardRequested, 3, instance="b")
        tl.record_event(a)
        tl.record_event(b)
        assert tl.events == (a, b)

    def test_sorts_across_instances(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.OnboardRequested, 10, instance="a"))
        tl.record_event(ev(P.OnboardRequested, 5, instance="b"))
        assert [e.instance_id for e in tl.events] == ["b", "a"]

    def test_other_instances_unconstrained(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.VmActive, 5, instance="a"))
        tl.record_event(ev(P.OnboardRequested, 7, instance="b"))
        assert len(tl) == 2

    def test_terminated_any_time(self):
        tl = LifecycleTimeline()
        tl.record_event(ev(P.VnfOperational, 10))
        tl.record_event(ev(P.Terminated, 2))
        assert len(tl) == 2


class TestEventInvariants:
    def test_negative_timestamp_rejected(self):
        with pytest.raises(InvalidValue):
            ev(P.OnboardRequested, -1)

    def test_action_id_required_for_action_phase(self):
        with pytest.raises(InvalidValue):
            ev(P.ActionExecuted, 0)

    def test_action_id_forbidden_for_chain_phase(self):
        with pytest.raises(InvalidValue):
            LifecycleEvent("i1", "vX", P.VmActive, 0, action_id="a1")


class TestClockDomains:
    def test_extend_same_domain(self):
        a = LifecycleTimeline(clock_domain="virtual")
        b = LifecycleTimeline(clock_domain="virtual")
        b.record_event(ev(P.OnboardRequested, 0))
        a.extend(b)
        assert len(a) == 1

    def test_extend_mixed_domains_rejected(self):
        a = LifecycleTimeline(clock_domain="virtual")
        b = LifecycleTimeline(clock_domain="wall")
        with pytest.raises(ClockDomainMismatch):
            a.extend(b)


@st.composite
def consistent_instance_events(draw):
    """A per-instance event list whose timestamps respect the phase chain."""
    count = draw(st.integers(1, len(CHAIN)))
    phases = CHAIN[:count]
    gaps = draw(st.lists(st.integers(0, 1000), min_size=count, max_size=count))
    t = 0
    events = []
    for phase, gap in zip(phases, gaps):
        t += gap
        events.append(ev(phase, t))
    return events


class TestProperties:
    @given(consistent_instance_events())
    def test_consistent_histories_accepted(self, events):
        tl = LifecycleTimeline()
        for e in events:
            tl.record_event(e)
        stamps = [e.timestamp_ns for e in tl.events]
        assert stamps == sorted(stamps)

    @given(consistent_instance_events(), st.randoms())
    def test_insertion_order_does_not_matter_for_consistent_sets(self, events, rnd):
        shuffled = list(events)
        rnd.shuffle(shuffled)
        tl = LifecycleTimeline()
        for e in shuffled:
            tl.record_event(e)
        assert len(tl) == len(events)
