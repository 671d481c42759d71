import math

import pytest
from hypothesis import given, settings, strategies as st

from manobench.errors import (
    EmptySampleSet,
    InvalidValue,
    InvalidWeights,
    MissingPhase,
    MixedKinds,
    UnknownAction,
)
from manobench.kpi import (
    AggregateMode,
    EQUAL_WEIGHTS,
    KpiKind,
    KpiSample,
    QodInputs,
    aggregate,
    dpd,
    opd,
    percentile_nearest_rank,
    qod_score,
    rod,
)
from manobench.lifecycle import (
    ActionKind,
    LifecycleEvent,
    LifecyclePhase,
    LifecycleTimeline,
)
from manobench.resources import Resources

P = LifecyclePhase
S = 1_000_000_000


def ev(phase, t, instance="i1", action=None, kind=None):
    return LifecycleEvent(instance, "vX", phase, t, action_id=action,
                          action_kind=kind)


def timeline(*events):
    tl = LifecycleTimeline()
    for e in events:
        tl.record_event(e)
    return tl


class TestDelaySamples:
    def test_opd_subtraction(self):
        tl = timeline(ev(P.OnboardRequested, 0), ev(P.VmActive, 5 * S))
        sample = opd(tl, "i1")
        assert sample.kind is KpiKind.OPD
        assert sample.duration_ns == 5 * S

    def test_opd_zero_latency(self):
        tl = timeline(ev(P.OnboardRequested, 0), ev(P.VmActive, 0))
        assert opd(tl, "i1").duration_ns == 0

    def test_opd_missing_boundary_named(self):
        tl = timeline(ev(P.OnboardRequested, 0))
        with pytest.raises(MissingPhase) as excinfo:
            opd(tl, "i1")
        assert excinfo.value.phase == "VmActive"

    def test_dpd_subtraction(self):
        tl = timeline(
            ev(P.InstantiateRequested, 10 * S), ev(P.VnfOperational, 14 * S)
        )
        sample = dpd(tl, "i1")
        assert sample.kind is KpiKind.DPD
        assert sample.duration_ns == 4 * S

    def test_rod_scale_out(self):
        tl = timeline(
            ev(P.ActionExecuted, 0, action="a1", kind=ActionKind.ScaleOut),
            ev(P.ActionCompleted, 3 * S, action="a1", kind=ActionKind.ScaleOut),
        )
        sample = rod(tl, "a1")
        assert sample.duration_ns == 3 * S
        assert sample.action_kind is ActionKind.ScaleOut

    def test_rod_unknown_action(self):
        tl = timeline()
        with pytest.raises(UnknownAction):
            rod(tl, "a9")

    def test_rod_missing_completion(self):
        tl = timeline(
            ev(P.ActionExecuted, 0, action="a1", kind=ActionKind.Migrate)
        )
        with pytest.raises(MissingPhase):
            rod(tl, "a1")


def make_inputs(**overrides):
    demand = Resources(2, 4096, 40)
    defaults = dict(
        required_short=demand,
        required_long=demand,
        offered_residual=Resources(8, 16384, 160),
        colocated_headroom_before={},
        colocated_headroom_after={},
        attempts=1,
        decision_latency_ns=0,
    )
    defaults.update(overrides)
    return QodInputs(**defaults)


class TestQod:
    def test_maximal_case(self):
        score = qod_score(make_inputs())
        assert score.components == (1.0, 1.0, 1.0, 1.0, 1.0)
        assert score.composite == 1.0

    def test_two_attempts_equal_weights(self):
        # 0.2 * (1 + 1 + 1 + 0.5 + 1)
        score = qod_score(make_inputs(attempts=2))
        assert score.attempt_efficiency == 0.5
        assert score.composite == pytest.approx(0.9)

    def test_min_ratio_fulfillment(self):
        inputs = make_inputs(
            offered_residual=Resources(1, 16384, 160),
            required_short=Resources(2, 4096, 40),
        )
        score = qod_score(inputs)
        assert score.fulfillment_short == 0.5

    def test_zero_required_dimension_counts_fulfilled(self):
        inputs = make_inputs(
            required_short=Resources(0, 0, 0),
            offered_residual=Resources(0, 0, 0),
        )
        assert qod_score(inputs).fulfillment_short == 1.0

    def test_worst_case_headroom_loss(self):
        inputs = make_inputs(
            colocated_headroom_before={"a": 0.8, "b": 0.6},
            colocated_headroom_after={"a": 0.5, "b": 0.55},
        )
        score = qod_score(inputs)
        assert score.non_intrusiveness == pytest.approx(1.0 - 0.3)

    def test_timeliness_decay(self):
        inputs = make_inputs(decision_latency_ns=S)
        score = qod_score(inputs, tau_ns=S)
        assert score.timeliness == pytest.approx(math.exp(-1))

    def test_invalid_weights(self):
        with pytest.raises(InvalidWeights):
            qod_score(make_inputs(), weights=(0.5, 0.5, 0.5, 0.5, 0.5))
        with pytest.raises(InvalidWeights):
            qod_score(make_inputs(), weights=(1.0, 0.2, -0.2, 0.0, 0.0))
        with pytest.raises(InvalidWeights):
            qod_score(make_inputs(), weights=(0.5, 0.5))

    def test_invalid_tau(self):
        with pytest.raises(InvalidValue):
            qod_score(make_inputs(), tau_ns=0)

    def test_attempts_below_one_rejected(self):
        with pytest.raises(InvalidValue):
            make_inputs(attempts=0)

    def test_headroom_outside_unit_interval_rejected(self):
        with pytest.raises(InvalidValue):
            make_inputs(colocated_headroom_before={"a": 1.5})


resources_st = st.builds(
    Resources,
    vcpus=st.integers(0, 64),
    memory_mb=st.integers(0, 1 << 16),
    storage_gb=st.integers(0, 1 << 10),
)


@st.composite
def qod_inputs_st(draw):
    ids = draw(st.lists(st.integers(0, 5).map(str), max_size=4, unique=True))
    before = {i: draw(st.floats(0, 1)) for i in ids}
    after = {i: draw(st.floats(0, 1)) for i in ids}
    return QodInputs(
        required_short=draw(resources_st),
        required_long=draw(resources_st),
        offered_residual=draw(resources_st),
        colocated_headroom_before=before,
        colocated_headroom_after=after,
        attempts=draw(st.integers(1, 10)),
        decision_latency_ns=draw(st.integers(0, 10 * S)),
    )


class TestQodProperties:
    @given(qod_inputs_st())
    def test_components_and_composite_in_unit_interval(self, inputs):
        score = qod_score(inputs)
        for component in score.components:
            assert 0.0 <= component <= 1.0
        assert 0.0 <= score.composite <= 1.0

    @given(qod_inputs_st(), st.integers(1, 5))
    def test_monotone_nonincreasing_in_attempts(self, inputs, extra):
        base = qod_score(inputs).composite
        more = qod_score(
            QodInputs(
                required_short=inputs.required_short,
                required_long=inputs.required_long,
                offered_residual=inputs.offered_residual,
                colocated_headroom_before=inputs.colocated_headroom_before,
                colocated_headroom_after=inputs.colocated_headroom_after,
                attempts=inputs.attempts + extra,
                decision_latency_ns=inputs.decision_latency_ns,
            )
        ).composite
        assert more <= base

    @given(qod_inputs_st(), st.integers(1, 10 * S))
    def test_monotone_nonincreasing_in_latency(self, inputs, extra):
        base = qod_score(inputs).composite
        later = qod_score(
            QodInputs(
                required_short=inputs.required_short,
                required_long=inputs.required_long,
                offered_residual=inputs.offered_residual,
                colocated_headroom_before=inputs.colocated_headroom_before,
                colocated_headroom_after=inputs.colocated_headroom_after,
                attempts=inputs.attempts,
                decision_latency_ns=inputs.decision_latency_ns + extra,
            )
        ).composite
        assert later <= base

    @given(qod_inputs_st(), st.integers(1, 16))
    def test_monotone_nondecreasing_in_offered(self, inputs, extra):
        base = qod_score(inputs).composite
        bigger = qod_score(
            QodInputs(
                required_short=inputs.required_short,
                required_long=inputs.required_long,
                offered_residual=inputs.offered_residual
                + Resources(extra, extra, extra),
                colocated_headroom_before=inputs.colocated_headroom_before,
                colocated_headroom_after=inputs.colocated_headroom_after,
                attempts=inputs.attempts,
                decision_latency_ns=inputs.decision_latency_ns,
            )
        ).composite
        assert bigger >= base


def sample(duration, kind=KpiKind.OPD, vnf="vX", instance="i1"):
    return KpiSample(kind=kind, vnf_name=vnf, instance_id=instance,
                     duration_ns=duration)


class TestAggregate:
    def test_sum(self):
        stats = aggregate([sample(1), sample(2), sample(3)], AggregateMode.Sum)
        assert stats.value_ns == 6
        assert stats.sample_count == 3

    def test_mean(self):
        stats = aggregate([sample(1), sample(2), sample(3)], AggregateMode.Mean)
        assert stats.value_ns == 2

    def test_p95_constant_distribution(self):
        stats = aggregate([sample(7)] * 100, AggregateMode.P95)
        assert stats.value_ns == 7

    def test_p95_nearest_rank(self):
        values = list(range(1, 101))
        assert percentile_nearest_rank(values, 95.0) == 95

    def test_empty_rejected(self):
        with pytest.raises(EmptySampleSet):
            aggregate([], AggregateMode.Sum)

    def test_mixed_kinds_rejected(self):
        with pytest.raises(MixedKinds):
            aggregate([sample(1), sample(2, kind=KpiKind.DPD)],
                      AggregateMode.Sum)

    def test_makespan_without_timeline_equals_sum(self):
        stats = aggregate([sample(3), sample(4)], AggregateMode.Makespan)
        assert stats.value_ns == 7

    def test_makespan_with_timeline(self):
        tl = LifecycleTimeline()
        # two overlapping onboard windows: [0, 5] and [2, 9]
        tl.record_event(ev(P.OnboardRequested, 0, instance="a"))
        tl.record_event(ev(P.VmActive, 5, instance="a"))
        tl.record_event(ev(P.OnboardRequested, 2, instance="b"))
        tl.record_event(ev(P.VmActive, 9, instance="b"))
        samples = [opd(tl, "a"), opd(tl, "b")]
        stats = aggregate(samples, AggregateMode.Makespan, timeline=tl)
        assert stats.value_ns == 9

    @given(
        st.lists(st.integers(0, 10**9), min_size=2, max_size=20),
        st.integers(1, 19),
    )
    def test_sum_additive_over_partitions(self, durations, cut):
        cut = min(cut, len(durations) - 1)
        samples = [sample(d) for d in durations]
        whole = aggregate(samples, AggregateMode.Sum).value_ns
        left = aggregate(samples[:cut], AggregateMode.Sum).value_ns
        right = aggregate(samples[cut:], AggregateMode.Sum).value_ns
        assert whole == left + right

    @given(st.integers(0, 10**9), st.integers(1, 50))
    def test_p95_of_identical_values(self, value, count):
        stats = aggregate([sample(value)] * count, AggregateMode.P95)
        assert stats.value_ns == value
