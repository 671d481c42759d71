"""Operational KPI extraction: delay samples, decision quality, aggregation.

Three delay KPIs are cut out of a lifecycle timeline:

  onboarding delay     OnboardRequested     -> VmActive
  deployment delay     InstantiateRequested -> VnfOperational
  orchestration delay  ActionExecuted       -> ActionCompleted (per action)

Decision quality scores a single placement/LCM decision on five normalized
components combined as a weighted arithmetic mean. The numeric form is ours:
it is the simplest formula that is monotone in every criterion and stays in
[0, 1]. Timeliness decays exponentially with decision latency (scale tau,
default one second).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .errors import (
    EmptySampleSet,
    InvalidValue,
    InvalidWeights,
    MissingPhase,
    MixedKinds,
    UnknownAction,
)
from .lifecycle import LifecyclePhase, LifecycleTimeline, ActionKind
from .resources import Resources

DEFAULT_TAU_NS = 1_000_000_000  # 1 s timeliness scale
EQUAL_WEIGHTS = (0.2, 0.2, 0.2, 0.2, 0.2)

_WEIGHT_TOLERANCE = 1e-9


class KpiKind(Enum):
    OPD = "OPD"
    DPD = "DPD"
    ROD = "ROD"


@dataclass(frozen=True)
class KpiSample:
    kind: KpiKind
    vnf_name: str
    instance_id: str
    duration_ns: int
    action_kind: ActionKind | None = None
    action_id: str | None = None

    def __post_init__(self):
        if self.duration_ns < 0:
            raise InvalidValue("duration_ns", "must be >= 0")


def _boundary(timeline: LifecycleTimeline, instance_id: str,
              phase: LifecyclePhase):
    event = timeline.first(instance_id, phase)
    if event is None:
        raise MissingPhase(instance_id, phase.value)
    return event


def opd(timeline: LifecycleTimeline, instance_id: str) -> KpiSample:
    """Onboarding delay of one instance: request to booted VM."""
    start = _boundary(timeline, instance_id, LifecyclePhase.OnboardRequested)
    end = _boundary(timeline, instance_id, LifecyclePhase.VmActive)
    return KpiSample(
        kind=KpiKind.OPD,
        vnf_name=start.vnf_name,
        instance_id=instance_id,
        duration_ns=end.timestamp_ns - start.timestamp_ns,
    )


def dpd(timeline: LifecycleTimeline, instance_id: str) -> KpiSample:
    """Deployment delay of one instance: instantiate request to operational VNF."""
    start = _boundary(timeline, instance_id, LifecyclePhase.InstantiateRequested)
    end = _boundary(timeline, instance_id, LifecyclePhase.VnfOperational)
    return KpiSample(
        kind=KpiKind.DPD,
        vnf_name=start.vnf_name,
        instance_id=instance_id,
        duration_ns=end.timestamp_ns - start.timestamp_ns,
    )


def rod(timeline: LifecycleTimeline, action_id: str) -> KpiSample:
    """Orchestration delay of one run-time action: executed to completed."""
    if not timeline.has_action(action_id):
        raise UnknownAction(action_id)
    executed = timeline.action_event(action_id, LifecyclePhase.ActionExecuted)
    completed = timeline.action_event(action_id, LifecyclePhase.ActionCompleted)
    if executed is None:
        raise MissingPhase(action_id, LifecyclePhase.ActionExecuted.value)
    if completed is None:
        raise MissingPhase(action_id, LifecyclePhase.ActionCompleted.value)
    return KpiSample(
        kind=KpiKind.ROD,
        vnf_name=executed.vnf_name,
        instance_id=executed.instance_id,
        duration_ns=completed.timestamp_ns - executed.timestamp_ns,
        action_kind=executed.action_kind,
        action_id=action_id,
    )


# --- decision quality --------------------------------------------------------


@dataclass(frozen=True)
class QodInputs:
    """Everything one LCM decision is judged on.

    required_short / required_long are the managed VNF's demand over the two
    horizons; offered_residual is the chosen node's residual capacity at
    decision time. Headroom maps give each co-located VNF the node's residual
    fraction before and after the decision.
    """

    required_short: Resources
    required_long: Resources
    offered_residual: Resources
    colocated_headroom_before: Mapping[str, float]
    colocated_headroom_after: Mapping[str, float]
    attempts: int
    decision_latency_ns: int

    def __post_init__(self):
        if self.attempts < 1:
            raise InvalidValue("attempts", "must be >= 1")
        if self.decision_latency_ns < 0:
            raise InvalidValue("decision_latency_ns", "must be >= 0")
        for label, mapping in (
            ("colocated_headroom_before", self.colocated_headroom_before),
            ("colocated_headroom_after", self.colocated_headroom_after),
        ):
            for key, frac in mapping.items():
                if not 0.0 <= frac <= 1.0:
                    raise InvalidValue(label, f"{key}: fraction {frac} not in [0,1]")


@dataclass(frozen=True)
class QodScore:
    fulfillment_short: float
    fulfillment_long: float
    non_intrusiveness: float
    attempt_efficiency: float
    timeliness: float
    composite: float
    weights: tuple[float, float, float, float, float]

    @property
    def components(self) -> tuple[float, float, float, float, float]:
        return (
            self.fulfillment_short,
            self.fulfillment_long,
            self.non_intrusiveness,
            self.attempt_efficiency,
            self.timeliness,
        )


def _fulfillment(offered: Resources, required: Resources) -> float:
    # a required dimension of 0 counts as fulfilled
    ratios = []
    for dim in Resources.DIMENSIONS:
        need = getattr(required, dim)
        have = getattr(offered, dim)
        ratios.append(1.0 if need <= 0 else have / need)
    return min(1.0, min(ratios))


def qod_score(
    inputs: QodInputs,
    weights: Sequence[float] = EQUAL_WEIGHTS,
    tau_ns: int = DEFAULT_TAU_NS,
) -> QodScore:
    """Score one decision; components and the composite all live in [0, 1].

    Weight order: (fulfillment_short, fulfillment_long, non_intrusiveness,
    attempt_efficiency, timeliness).
    """
    weights = tuple(float(w) for w in weights)
    if len(weights) != 5 or any(w < 0 for w in weights):
        raise InvalidWeights(f"need 5 non-negative weights, got {weights}")
    if abs(sum(weights) - 1.0) > _WEIGHT_TOLERANCE:
        raise InvalidWeights(f"weights must sum to 1, got {sum(weights)}")
    if tau_ns <= 0:
        raise InvalidValue("tau_ns", "must be > 0")

    fulfillment_short = _fulfillment(inputs.offered_residual, inputs.required_short)
    fulfillment_long = _fulfillment(inputs.offered_residual, inputs.required_long)

    # worst-case headroom loss across neighbours: one starved co-located VNF
    # is a failure regardless of averages
    worst_loss = 0.0
    for key, before in inputs.colocated_headroom_before.items():
        after = inputs.colocated_headroom_after.get(key, before)
        worst_loss = max(worst_loss, max(0.0, before - after))
    non_intrusiveness = 1.0 - worst_loss

    attempt_efficiency = 1.0 / inputs.attempts
    timeliness = math.exp(-inputs.decision_latency_ns / tau_ns)

    components = (
        fulfillment_short,
        fulfillment_long,
        non_intrusiveness,
        attempt_efficiency,
        timeliness,
    )
    composite = sum(w * c for w, c in zip(weights, components))
    return QodScore(*components, composite=composite, weights=weights)


# --- aggregation --------------------------------------------------------------


class AggregateMode(Enum):
    Sum = "Sum"
    Makespan = "Makespan"
    Mean = "Mean"
    P95 = "P95"


@dataclass(frozen=True)
class AggregateStats:
    mode: AggregateMode
    value_ns: int
    sample_count: int


_SAMPLE_BOUNDARIES = {
    KpiKind.OPD: (LifecyclePhase.OnboardRequested, LifecyclePhase.VmActive),
    KpiKind.DPD: (LifecyclePhase.InstantiateRequested, LifecyclePhase.VnfOperational),
}


def _sample_interval(sample: KpiSample, timeline: LifecycleTimeline):
    if sample.kind is KpiKind.ROD:
        executed = timeline.action_event(
            sample.action_id or "", LifecyclePhase.ActionExecuted
        )
        completed = timeline.action_event(
            sample.action_id or "", LifecyclePhase.ActionCompleted
        )
        if executed is None or completed is None:
            raise UnknownAction(sample.action_id or "<missing>")
        return executed.timestamp_ns, completed.timestamp_ns
    start_phase, end_phase = _SAMPLE_BOUNDARIES[sample.kind]
    start = _boundary(timeline, sample.instance_id, start_phase)
    end = _boundary(timeline, sample.instance_id, end_phase)
    return start.timestamp_ns, end.timestamp_ns


def percentile_nearest_rank(values: Sequence[int], pct: float) -> int:
    """Nearest-rank percentile: deterministic, no interpolation."""
    if not values:
        raise EmptySampleSet("no values")
    ordered = sorted(values)
    rank = math.ceil(pct / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]


def aggregate(
    samples: Sequence[KpiSample],
    mode: AggregateMode,
    timeline: LifecycleTimeline | None = None,
) -> AggregateStats:
    """Aggregate homogeneous samples.

    Sum adds durations; Mean divides by the count (rounded to whole ns);
    P95 is the nearest-rank 95th percentile. Makespan spans earliest start to
    latest end when the source timeline is provided, and falls back to Sum
    for sequential campaigns without one.
    """
    if not samples:
        raise EmptySampleSet("cannot aggregate zero samples")
    kinds = {s.kind for s in samples}
    if len(kinds) > 1:
        raise MixedKinds(f"mixed sample kinds: {sorted(k.value for k in kinds)}")

    durations = [s.duration_ns for s in samples]
    n = len(durations)
    if mode is AggregateMode.Sum:
        value = sum(durations)
    elif mode is AggregateMode.Mean:
        value = round(sum(durations) / n)
    elif mode is AggregateMode.P95:
        value = percentile_nearest_rank(durations, 95.0)
    elif mode is AggregateMode.Makespan:
        if timeline is None:
            value = sum(durations)
        else:
            intervals = [_sample_interval(s, timeline) for s in samples]
            value = max(end for _, end in intervals) - min(
                start for start, _ in intervals
            )
    else:  # pragma: no cover - enum is closed
        raise InvalidValue("mode", f"unknown aggregate mode {mode!r}")
    return AggregateStats(mode=mode, value_ns=value, sample_count=n)
