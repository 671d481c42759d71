"""Lifecycle phases, events, and the ordered timeline they accumulate in.

The timeline is the raw material for every operational KPI: a campaign
records phase-transition events per VNF/NS instance and KPI extraction reads
immutable snapshots of it. Timestamps are integer nanoseconds on a single
monotonic clock per campaign; the timeline carries a clock-domain tag and
refuses to mix domains.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .errors import ClockDomainMismatch, InvalidValue, PhaseOrderViolation

CLOCK_VIRTUAL = "virtual"
CLOCK_WALL = "wall"


class LifecyclePhase(Enum):
    OnboardRequested = "OnboardRequested"
    ImageTransferred = "ImageTransferred"
    VmActive = "VmActive"
    InstantiateRequested = "InstantiateRequested"
    VnfConfigured = "VnfConfigured"
    VnfOperational = "VnfOperational"
    ActionExecuted = "ActionExecuted"
    ActionCompleted = "ActionCompleted"
    Terminated = "Terminated"


class ActionKind(Enum):
    ScaleOut = "ScaleOut"
    ScaleIn = "ScaleIn"
    Migrate = "Migrate"
    Update = "Update"


# Deployment phases are totally ordered per instance; action phases are
# ordered per action id; Terminated is unconstrained (termination may happen
# at any point in the life cycle).
_PHASE_RANK = {
    LifecyclePhase.OnboardRequested: 0,
    LifecyclePhase.ImageTransferred: 1,
    LifecyclePhase.VmActive: 2,
    LifecyclePhase.InstantiateRequested: 3,
    LifecyclePhase.VnfConfigured: 4,
    LifecyclePhase.VnfOperational: 5,
}

_ACTION_PHASES = {LifecyclePhase.ActionExecuted, LifecyclePhase.ActionCompleted}


@dataclass(frozen=True)
class LifecycleEvent:
    instance_id: str
    vnf_name: str
    phase: LifecyclePhase
    timestamp_ns: int
    action_id: str | None = None
    action_kind: ActionKind | None = None

    def __post_init__(self):
        if self.timestamp_ns < 0:
            raise InvalidValue("timestamp_ns", "must be >= 0")
        has_action = self.phase in _ACTION_PHASES
        if has_action and self.action_id is None:
            raise InvalidValue("action_id", f"required for phase {self.phase.value}")
        if not has_action and self.action_id is not None:
            raise InvalidValue("action_id", f"forbidden for phase {self.phase.value}")


class LifecycleTimeline:
    """Append-only event log ordered by timestamp, ties kept in insertion order.

    Single-writer: one campaign thread appends. snapshot() returns an
    immutable view safe to hand to concurrent readers.
    """

    def __init__(self, clock_domain: str = CLOCK_VIRTUAL,
                 events: Iterable[LifecycleEvent] = ()):
        self.clock_domain = clock_domain
        self._events: list[LifecycleEvent] = []
        for e in events:
            self.record_event(e)

    def __len__(self) -> int:
        return len(self._events)

    def __iter__(self) -> Iterator[LifecycleEvent]:
        return iter(tuple(self._events))

    @property
    def events(self) -> tuple[LifecycleEvent, ...]:
        return tuple(self._events)

    def snapshot(self) -> tuple[LifecycleEvent, ...]:
        return tuple(self._events)

    def record_event(self, event: LifecycleEvent) -> "LifecycleTimeline":
        """Insert an event, rejecting any per-instance phase-order violation."""
        self._check_phase_order(event)
        # bisect_right keeps equal-timestamp events in insertion order
        bisect.insort_right(self._events, event, key=lambda e: e.timestamp_ns)
        return self

    def record_all(self, events: Iterable[LifecycleEvent]) -> "LifecycleTimeline":
        for e in events:
            self.record_event(e)
        return self

    def extend(self, other: "LifecycleTimeline") -> "LifecycleTimeline":
        if other.clock_domain != self.clock_domain:
            raise ClockDomainMismatch(
                f"cannot mix {other.clock_domain!r} events into a "
                f"{self.clock_domain!r} timeline"
            )
        return self.record_all(other.events)

    def _check_phase_order(self, event: LifecycleEvent) -> None:
        rank = _PHASE_RANK.get(event.phase)
        for existing in self._events:
            if existing.instance_id != event.instance_id:
                continue
            if rank is not None:
                other_rank = _PHASE_RANK.get(existing.phase)
                if other_rank is None:
                    continue
                if other_rank < rank and existing.timestamp_ns > event.timestamp_ns:
                    raise PhaseOrderViolation(
                        event.instance_id,
                        f"{event.phase.value}@{event.timestamp_ns} precedes "
                        f"{existing.phase.value}@{existing.timestamp_ns}",
                    )
                if other_rank > rank and existing.timestamp_ns < event.timestamp_ns:
                    raise PhaseOrderViolation(
                        event.instance_id,
                        f"{event.phase.value}@{event.timestamp_ns} follows "
                        f"{existing.phase.value}@{existing.timestamp_ns}",
                    )
            elif event.phase in _ACTION_PHASES and existing.action_id == event.action_id:
                if (
                    event.phase is LifecyclePhase.ActionCompleted
                    and existing.phase is LifecyclePhase.ActionExecuted
                    and event.timestamp_ns < existing.timestamp_ns
                ):
                    raise PhaseOrderViolation(
                        event.instance_id,
                        f"ActionCompleted@{event.timestamp_ns} precedes "
                        f"ActionExecuted@{existing.timestamp_ns} for {event.action_id}",
                    )
                if (
                    event.phase is LifecyclePhase.ActionExecuted
                    and existing.phase is LifecyclePhase.ActionCompleted
                    and event.timestamp_ns > existing.timestamp_ns
                ):
                    raise PhaseOrderViolation(
                        event.instance_id,
                        f"ActionExecuted@{event.timestamp_ns} follows "
                        f"ActionCompleted@{existing.timestamp_ns} for {event.action_id}",
                    )

    def instances(self) -> tuple[str, ...]:
        """Instance ids in order of first appearance."""
        seen: dict[str, None] = {}
        for e in self._events:
            seen.setdefault(e.instance_id, None)
        return tuple(seen)

    def events_for(self, instance_id: str) -> tuple[LifecycleEvent, ...]:
        return tuple(e for e in self._events if e.instance_id == instance_id)

    def first(self, instance_id: str, phase: LifecyclePhase) -> LifecycleEvent | None:
        for e in self._events:
            if e.instance_id == instance_id and e.phase is phase:
                return e
        return None

    def action_event(self, action_id: str,
                     phase: LifecyclePhase) -> LifecycleEvent | None:
        for e in self._events:
            if e.action_id == action_id and e.phase is phase:
                return e
        return None

    def has_action(self, action_id: str) -> bool:
        return any(e.action_id == action_id for e in self._events)
