"""Simulated MANO orchestrator driving the compute-pool model.

Accepts north-bound commands (onboard, instantiate, scale out, migrate,
terminate), performs placement under a configurable policy, injects
deterministic placement-rejection faults to exercise attempt counting, and
records a decision trace for every placement so each decision can be scored.

Fault injection is keyed by decision ordinal (1-based count of placement
decisions), never randomized: rejection forces the policy onto the next
candidate, and the attempt count is exactly 1 + rejections consumed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .descriptors import NsDescriptor, VnfPackage, validate_package
from .errors import (
    MissingPackage,
    NoFeasibleNode,
    UnknownNs,
    UnknownVnf,
    UnresolvedReference,
    ValidationFailed,
    InvalidValue,
    WrongState,
)
from .kpi import QodInputs
from .lifecycle import (
    ActionKind,
    LifecycleEvent,
    LifecyclePhase,
    LifecycleTimeline,
)
from .nfvi import PlacementPolicy, VimState, VirtualClock, VmState, stable_seed
from .resources import Resources


@dataclass(frozen=True)
class OrchestratorConfig:
    nbi_processing_ns: int = 0
    placement_policy: PlacementPolicy = PlacementPolicy.FirstFit
    # decision ordinal (1-based) -> forced rejection count
    fault_plan: dict = field(default_factory=dict)
    qod_horizon_ns: tuple[int, int] = (3_600_000_000_000, 86_400_000_000_000)

    def __post_init__(self):
        if self.nbi_processing_ns < 0:
            raise InvalidValue("nbi_processing_ns", "must be >= 0")
        for ordinal, count in self.fault_plan.items():
            if count < 0:
                raise InvalidValue("fault_plan", f"ordinal {ordinal}: count < 0")
        short, long = self.qod_horizon_ns
        if short > long:
            raise InvalidValue("qod_horizon_ns", "short horizon exceeds long")


class NsState:
    Created = "Created"
    Instantiating = "Instantiating"
    Operational = "Operational"
    Scaling = "Scaling"
    Terminated = "Terminated"


@dataclass
class NsInstance:
    ns_instance_id: str
    nsd_id: str
    vnf_instances: dict = field(default_factory=dict)  # vnf_name -> instance_id
    replicas: dict = field(default_factory=dict)  # vnf_name -> [instance_id]
    state: str = NsState.Created

    def member_instance_ids(self) -> list[str]:
        members = list(self.vnf_instances.values())
        for ids in self.replicas.values():
            members.extend(ids)
        return members


@dataclass(frozen=True)
class DecisionTrace:
    action_id: str
    candidate_nodes_considered: tuple[str, ...]
    attempts: int
    chosen_node: str
    decision_latency_ns: int
    qod_inputs: QodInputs


@dataclass
class OperationRecord:
    op_id: str
    kind: str  # onboard | instantiate | scale | migrate | terminate
    state: str  # COMPLETED | FAILED
    executed_at_ns: int
    completed_at_ns: int
    action_kind: ActionKind | None = None
    decision_trace: DecisionTrace | None = None
    instance_id: str | None = None
    vnf_name: str | None = None


class SimOrchestrator:
    """Single-owner command executor over one VIM and one virtual clock."""

    def __init__(self, config: OrchestratorConfig, vim: VimState,
                 clock: VirtualClock | None = None):
        self.config = config
        self.vim = vim
        self.clock = clock or VirtualClock()
        self.timeline = LifecycleTimeline(clock_domain="virtual")
        self.packages: dict[str, VnfPackage] = {}
        self.nsds: dict[str, NsDescriptor] = {}
        self.ns_instances: dict[str, NsInstance] = {}
        self.operations: dict[str, OperationRecord] = {}
        self.decision_traces: list[DecisionTrace] = []
        self._unbound: dict[str, list[str]] = {}  # vnfd_id -> idle instance ids
        self._instance_counters: dict[str, int] = {}
        self._ns_counter = 0
        self._op_counter = 0
        self._decision_ordinal = 0
        self._placement_rng = random.Random(
            stable_seed(vim.delay_model.seed, "placement")
        )

    # --- id generation ------------------------------------------------------

    def _next_instance_id(self, vnf_name: str) -> str:
        n = self._instance_counters.get(vnf_name, 0) + 1
        self._instance_counters[vnf_name] = n
        return f"{vnf_name}-{n}"

    def _next_op_id(self) -> str:
        self._op_counter += 1
        return f"op-{self._op_counter}"

    # --- placement with fault injection ---------------------------------------

    def _decide_placement(self, demand: Resources,
                          exclude_node: str | None = None):
        """Run the placement policy, applying the fault plan for this decision
        ordinal. Returns (chosen_node, considered, attempts)."""
        self._decision_ordinal += 1
        forced = self.config.fault_plan.get(self._decision_ordinal, 0)
        candidates = self.vim.candidate_nodes(
            demand, self.config.placement_policy, rng=self._placement_rng
        )
        if exclude_node is not None:
            candidates = [c for c in candidates if c != exclude_node]
        if not candidates:
            raise NoFeasibleNode("no candidate nodes for placement")
        if forced >= len(candidates):
            raise NoFeasibleNode(
                f"fault plan rejected all {len(candidates)} candidates"
            )
        considered = tuple(candidates[: forced + 1])
        return candidates[forced], considered, forced + 1

    def _qod_inputs(self, node_id: str, demand: Resources,
                    attempts: int) -> QodInputs:
        node = self.vim.node(node_id)
        residual = node.residual()
        before = node.headroom_fraction()
        after_res = residual - demand
        after = max(
            0.0,
            min(
                after_res.vcpus / node.capacity.vcpus,
                after_res.memory_mb / node.capacity.memory_mb,
                after_res.storage_gb / node.capacity.storage_gb,
            ),
        )
        colocated = list(node.allocations)
        return QodInputs(
            required_short=demand,
            required_long=demand,
            offered_residual=residual,
            colocated_headroom_before={i: before for i in colocated},
            colocated_headroom_after={i: after for i in colocated},
            attempts=attempts,
            # each policy invocation costs one command-processing quantum
            decision_latency_ns=attempts * self.config.nbi_processing_ns,
        )

    # --- NBI commands -----------------------------------------------------------

    def onboard(self, pkg: VnfPackage) -> tuple[str, list[LifecycleEvent]]:
        """Store a validated package, place and boot its VM."""
        violations = validate_package(pkg)
        if violations:
            raise ValidationFailed(violations)
        op_id = self._next_op_id()
        demand = Resources.of_flavor(pkg.vnfd.flavor)
        chosen, considered, attempts = self._decide_placement(demand)
        qod_inputs = self._qod_inputs(chosen, demand, attempts)

        package_id = pkg.vnfd.id
        self.packages[package_id] = pkg
        instance_id = self._next_instance_id(pkg.vnfd.name)
        self.vim.allocate(chosen, instance_id, demand)
        t0 = self.clock.now_ns
        _, events = self.vim.boot_vm(
            pkg, chosen, instance_id, self.clock,
            extra_first_delay_ns=self.config.nbi_processing_ns,
        )
        self.timeline.record_all(events)
        self._unbound.setdefault(package_id, []).append(instance_id)

        trace = DecisionTrace(
            action_id=op_id,
            candidate_nodes_considered=considered,
            attempts=attempts,
            chosen_node=chosen,
            decision_latency_ns=qod_inputs.decision_latency_ns,
            qod_inputs=qod_inputs,
        )
        self.decision_traces.append(trace)
        self.operations[op_id] = OperationRecord(
            op_id=op_id, kind="onboard", state="COMPLETED",
            executed_at_ns=t0, completed_at_ns=self.clock.now_ns,
        )
        return package_id, events

    def register_nsd(self, nsd: NsDescriptor) -> str:
        self.nsds[nsd.id] = nsd
        return nsd.id

    def create_ns(self, nsd_id: str) -> str:
        if nsd_id not in self.nsds:
            raise UnresolvedReference(nsd_id)
        self._ns_counter += 1
        ns_id = f"ns-{self._ns_counter}"
        self.ns_instances[ns_id] = NsInstance(ns_instance_id=ns_id, nsd_id=nsd_id)
        return ns_id

    def _instantiation_order(self, nsd: NsDescriptor) -> list[str]:
        order = list(nsd.forwarding_graph)
        order.extend(v for v in nsd.constituent_vnfds if v not in order)
        return order

    def instantiate_ns(self, ns_id: str) -> tuple[str, list[LifecycleEvent]]:
        """Instantiate every constituent in forwarding-graph order; atomic
        with respect to missing packages."""
        ns = self._require_ns(ns_id)
        if ns.state != NsState.Created:
            raise WrongState(f"{ns_id}: instantiate requires Created, is {ns.state}")
        nsd = self.nsds[ns.nsd_id]
        order = self._instantiation_order(nsd)
        for vnfd_id in order:
            if vnfd_id not in self.packages:
                raise MissingPackage(vnfd_id)
            if not self._unbound.get(vnfd_id):
                raise WrongState(f"no idle booted VM for descriptor {vnfd_id}")

        op_id = self._next_op_id()
        t0 = self.clock.now_ns
        ns.state = NsState.Instantiating
        events: list[LifecycleEvent] = []
        first = True
        for vnfd_id in order:
            instance_id = self._unbound[vnfd_id].pop(0)
            extra = self.config.nbi_processing_ns if first else 0
            first = False
            vnf_events = self.vim.instantiate_vnf(
                instance_id, self.clock, extra_first_delay_ns=extra
            )
            self.timeline.record_all(vnf_events)
            events.extend(vnf_events)
            ns.vnf_instances[self.packages[vnfd_id].vnfd.name] = instance_id
        ns.state = NsState.Operational
        self.operations[op_id] = OperationRecord(
            op_id=op_id, kind="instantiate", state="COMPLETED",
            executed_at_ns=t0, completed_at_ns=self.clock.now_ns,
        )
        return op_id, events

    def _find_constituent(self, ns: NsInstance, vnf_name: str) -> VnfPackage:
        nsd = self.nsds[ns.nsd_id]
        for vnfd_id in nsd.constituent_vnfds:
            pkg = self.packages.get(vnfd_id)
            if pkg is not None and pkg.vnfd.name == vnf_name:
                return pkg
        raise UnknownVnf(vnf_name)

    def scale_out(self, ns_id: str, vnf_name: str):
        """Add one replica of a constituent VNF; emits a measurable ScaleOut
        action pair and returns (replica_id, action_id, events, trace)."""
        ns = self._require_ns(ns_id)
        if ns.state != NsState.Operational:
            raise WrongState(f"{ns_id}: scale requires Operational, is {ns.state}")
        pkg = self._find_constituent(ns, vnf_name)
        demand = Resources.of_flavor(pkg.vnfd.flavor)

        # decide before emitting anything so a failed placement leaves the
        # service untouched
        chosen, considered, attempts = self._decide_placement(demand)
        qod_inputs = self._qod_inputs(chosen, demand, attempts)

        action_id = self._next_op_id()
        replica_id = self._next_instance_id(vnf_name)
        self.vim.allocate(chosen, replica_id, demand)
        ns.state = NsState.Scaling
        t0 = self.clock.now_ns
        executed = LifecycleEvent(
            replica_id, vnf_name, LifecyclePhase.ActionExecuted, t0,
            action_id=action_id, action_kind=ActionKind.ScaleOut,
        )
        self.timeline.record_event(executed)
        _, boot_events = self.vim.boot_vm(
            pkg, chosen, replica_id, self.clock,
            extra_first_delay_ns=self.config.nbi_processing_ns,
        )
        self.timeline.record_all(boot_events)
        cfg_events = self.vim.instantiate_vnf(replica_id, self.clock)
        self.timeline.record_all(cfg_events)
        completed = LifecycleEvent(
            replica_id, vnf_name, LifecyclePhase.ActionCompleted,
            self.clock.now_ns, action_id=action_id,
            action_kind=ActionKind.ScaleOut,
        )
        self.timeline.record_event(completed)
        ns.replicas.setdefault(vnf_name, []).append(replica_id)
        ns.state = NsState.Operational

        trace = DecisionTrace(
            action_id=action_id,
            candidate_nodes_considered=considered,
            attempts=attempts,
            chosen_node=chosen,
            decision_latency_ns=qod_inputs.decision_latency_ns,
            qod_inputs=qod_inputs,
        )
        self.decision_traces.append(trace)
        events = [executed, *boot_events, *cfg_events, completed]
        self.operations[action_id] = OperationRecord(
            op_id=action_id, kind="scale", state="COMPLETED",
            executed_at_ns=t0, completed_at_ns=self.clock.now_ns,
            action_kind=ActionKind.ScaleOut, decision_trace=trace,
            instance_id=replica_id, vnf_name=vnf_name,
        )
        return replica_id, action_id, events, trace

    def migrate_vnf(self, ns_id: str, vnf_name: str):
        """Move a constituent's primary VM to another node chosen by the
        placement policy; returns (action_id, events, trace)."""
        ns = self._require_ns(ns_id)
        if ns.state != NsState.Operational:
            raise WrongState(f"{ns_id}: migrate requires Operational, is {ns.state}")
        if vnf_name not in ns.vnf_instances:
            raise UnknownVnf(vnf_name)
        instance_id = ns.vnf_instances[vnf_name]
        vm = self.vim.instances[instance_id]
        demand = Resources.of_flavor(vm.flavor)
        chosen, considered, attempts = self._decide_placement(
            demand, exclude_node=vm.node_id
        )
        qod_inputs = self._qod_inputs(chosen, demand, attempts)
        action_id = self._next_op_id()
        t0 = self.clock.now_ns
        events = self.vim.migrate(
            instance_id, chosen, self.clock, action_id=action_id,
            extra_first_delay_ns=self.config.nbi_processing_ns,
        )
        self.timeline.record_all(events)
        trace = DecisionTrace(
            action_id=action_id,
            candidate_nodes_considered=considered,
            attempts=attempts,
            chosen_node=chosen,
            decision_latency_ns=qod_inputs.decision_latency_ns,
            qod_inputs=qod_inputs,
        )
        self.decision_traces.append(trace)
        self.operations[action_id] = OperationRecord(
            op_id=action_id, kind="migrate", state="COMPLETED",
            executed_at_ns=t0, completed_at_ns=self.clock.now_ns,
            action_kind=ActionKind.Migrate, decision_trace=trace,
            instance_id=instance_id, vnf_name=vnf_name,
        )
        return action_id, events, trace

    def terminate_ns(self, ns_id: str) -> list[LifecycleEvent]:
        """Release every allocation the service owns, including booted VMs a
        failed instantiation left unbound."""
        ns = self.ns_instances.pop(ns_id, None)
        if ns is None:
            raise UnknownNs(ns_id)
        op_id = self._next_op_id()
        t0 = self.clock.now_ns
        self.clock.advance(self.config.nbi_processing_ns)
        members = ns.member_instance_ids()
        nsd = self.nsds[ns.nsd_id]
        for vnfd_id in nsd.constituent_vnfds:
            members.extend(self._unbound.pop(vnfd_id, []))
        events = []
        for instance_id in members:
            events.append(self.vim.terminate(instance_id, self.clock))
        self.timeline.record_all(events)
        ns.state = NsState.Terminated
        self.operations[op_id] = OperationRecord(
            op_id=op_id, kind="terminate", state="COMPLETED",
            executed_at_ns=t0, completed_at_ns=self.clock.now_ns,
        )
        return events

    def release_unbound(self) -> int:
        """Drop VMs that were onboarded but never claimed by a service."""
        count = 0
        for ids in self._unbound.values():
            for instance_id in ids:
                self.timeline.record_event(self.vim.terminate(instance_id, self.clock))
                count += 1
        self._unbound.clear()
        return count

    # --- queries ------------------------------------------------------------

    def _require_ns(self, ns_id: str) -> NsInstance:
        try:
            return self.ns_instances[ns_id]
        except KeyError:
            raise UnknownNs(ns_id) from None

    def ns_status(self, ns_id: str) -> str:
        return self._require_ns(ns_id).state

    def ns_detail(self, ns_id: str) -> dict:
        """Wire-shaped view of a service: state plus per-VNF phase history."""
        ns = self._require_ns(ns_id)
        vnfs = []
        for vnf_name, instance_id in ns.vnf_instances.items():
            vnfs.append(self._vnf_detail(vnf_name, instance_id))
        for vnf_name, ids in ns.replicas.items():
            for instance_id in ids:
                vnfs.append(self._vnf_detail(vnf_name, instance_id))
        return {"state": ns.state, "vnfs": vnfs}

    def _vnf_detail(self, vnf_name: str, instance_id: str) -> dict:
        phase_timestamps = {}
        for event in self.timeline.events_for(instance_id):
            if event.action_id is not None:
                continue
            phase_timestamps.setdefault(event.phase.value, event.timestamp_ns)
        vm = self.vim.instances.get(instance_id)
        return {
            "name": vnf_name,
            "instance_id": instance_id,
            "state": vm.state.value if vm else "Unknown",
            "phase_timestamps": phase_timestamps,
        }

    def live_instances(self) -> list[tuple[str, str]]:
        """(instance_id, vnf_name) pairs for every non-terminated VM, in
        creation order."""
        return [
            (vm.instance_id, vm.vnf_name)
            for vm in self.vim.instances.values()
            if vm.state is not VmState.Terminated
        ]
