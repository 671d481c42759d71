"""Deterministic discrete-event model of a VIM-managed compute pool.

Logical time only advances through emitted delays: operations stamp events on
a virtual clock and move it forward, so desk-scale runs finish in
milliseconds and every timestamp is an exact function of the model
parameters. All randomness (delay jitter, metric noise, random placement)
derives from explicit seeds, making runs reproducible byte-for-byte.

Delay model, with h = descriptor complexity_hint and all terms in ns:

  image transfer   image_size_mb / transfer_rate          (rate 0 = instant)
  VM boot          sched + boot_base + boot_per_vcpu * vcpus
                   + boot_per_service * h
  VNF configure    cfg_base + cfg_per_service * h
  live migration   flavor memory_mb / transfer_rate

Each inter-event delay is multiplied by (1 + u * jitter_pct/100) with u drawn
uniformly from [-1, 1] out of the seeded generator.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .descriptors import VnfDescriptor, VnfPackage
from .errors import (
    AdmissionViolation,
    DuplicateInstance,
    InvalidCapacity,
    InvalidValue,
    NoAllocation,
    NoFeasibleNode,
    WrongState,
)
from .lifecycle import ActionKind, LifecycleEvent, LifecyclePhase
from .resources import Resources

NS_PER_S = 1_000_000_000


def stable_seed(*parts) -> int:
    """Process-independent 64-bit seed derived from the given parts."""
    digest = hashlib.blake2b(
        ":".join(str(p) for p in parts).encode(), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big")


class VirtualClock:
    """Monotonic logical clock in integer nanoseconds."""

    def __init__(self, start_ns: int = 0):
        self._now = start_ns

    @property
    def now_ns(self) -> int:
        return self._now

    def advance_to(self, t_ns: int) -> None:
        if t_ns < self._now:
            raise InvalidValue("t_ns", "clock cannot move backwards")
        self._now = t_ns

    def advance(self, delta_ns: int) -> None:
        self.advance_to(self._now + delta_ns)


@dataclass(frozen=True)
class DelayModel:
    sched_ns: int = 0
    transfer_rate_mb_per_s: float = 0.0  # 0 disables transfer delay
    boot_base_ns: int = 0
    boot_per_vcpu_ns: int = 0
    boot_per_service_ns: int = 0
    cfg_base_ns: int = 0
    cfg_per_service_ns: int = 0
    jitter_pct: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("sched_ns", "transfer_rate_mb_per_s", "boot_base_ns",
                     "boot_per_vcpu_ns", "boot_per_service_ns", "cfg_base_ns",
                     "cfg_per_service_ns"):
            if getattr(self, name) < 0:
                raise InvalidValue(name, "must be >= 0")
        if not 0.0 <= self.jitter_pct <= 100.0:
            raise InvalidValue("jitter_pct", "must be in [0, 100]")

    @classmethod
    def defaults(cls, seed: int = 0) -> "DelayModel":
        """Calibrated defaults: complex components (high hint) boot and
        configure visibly slower than simple ones. Jitter stays off so the
        orderings are exact; campaigns opt in per config."""
        return cls(
            sched_ns=100_000_000,
            transfer_rate_mb_per_s=100.0,
            boot_base_ns=2 * NS_PER_S,
            boot_per_vcpu_ns=NS_PER_S // 2,
            boot_per_service_ns=NS_PER_S,
            cfg_base_ns=NS_PER_S,
            cfg_per_service_ns=2 * NS_PER_S,
            jitter_pct=0.0,
            seed=seed,
        )

    def transfer_ns(self, size_mb: float) -> int:
        if self.transfer_rate_mb_per_s <= 0:
            return 0
        return round(size_mb * NS_PER_S / self.transfer_rate_mb_per_s)

    def boot_ns(self, vnfd: VnfDescriptor) -> int:
        return (
            self.sched_ns
            + self.boot_base_ns
            + self.boot_per_vcpu_ns * vnfd.flavor.vcpus
            + self.boot_per_service_ns * vnfd.complexity_hint
        )

    def configure_ns(self, vnfd: VnfDescriptor) -> int:
        return self.cfg_base_ns + self.cfg_per_service_ns * vnfd.complexity_hint


@dataclass(frozen=True)
class MetricModel:
    """Synthetic per-VNF utilization generator; baselines are config data."""

    cpu_base_pct: dict = field(default_factory=dict)  # vnf_name -> base %
    default_cpu_base_pct: float = 40.0
    cpu_noise_amp_pct: float = 5.0
    memory_fraction: float = 0.5
    sample_interval_ns: int = NS_PER_S
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.memory_fraction <= 1.0:
            raise InvalidValue("memory_fraction", "must be in [0, 1]")
        if self.sample_interval_ns <= 0:
            raise InvalidValue("sample_interval_ns", "must be > 0")


class MetricName(Enum):
    cpu_util_pct = "cpu_util_pct"
    memory_usage_mb = "memory_usage_mb"


METRIC_UNITS = {
    MetricName.cpu_util_pct: "percent",
    MetricName.memory_usage_mb: "MB",
}


@dataclass(frozen=True)
class MetricSample:
    instance_id: str
    metric: MetricName
    timestamp_ns: int
    value: float


class VmState(Enum):
    Booting = "Booting"
    Active = "Active"
    Configuring = "Configuring"
    Operational = "Operational"
    Migrating = "Migrating"
    Terminated = "Terminated"


_VM_TRANSITIONS = {
    VmState.Booting: {VmState.Active, VmState.Terminated},
    VmState.Active: {VmState.Configuring, VmState.Terminated},
    VmState.Configuring: {VmState.Operational, VmState.Terminated},
    VmState.Operational: {VmState.Migrating, VmState.Terminated},
    VmState.Migrating: {VmState.Operational},
    VmState.Terminated: set(),
}


@dataclass
class VmInstance:
    instance_id: str
    vnf_name: str
    node_id: str
    state: VmState
    vnfd: VnfDescriptor
    created_at_ns: int

    @property
    def flavor(self):
        return self.vnfd.flavor

    def transition(self, new_state: VmState) -> None:
        if new_state not in _VM_TRANSITIONS[self.state]:
            raise WrongState(
                f"{self.instance_id}: cannot go {self.state.value} -> {new_state.value}"
            )
        self.state = new_state


@dataclass
class ComputeNode:
    node_id: str
    capacity: Resources
    allocations: dict[str, Resources] = field(default_factory=dict)

    def used(self) -> Resources:
        total = Resources.zero()
        for demand in self.allocations.values():
            total = total + demand
        return total

    def residual(self) -> Resources:
        return self.capacity - self.used()

    def admits(self, demand: Resources) -> bool:
        return demand.fits_within(self.residual())

    def headroom_fraction(self) -> float:
        """Smallest per-dimension residual fraction, in [0, 1]."""
        res = self.residual()
        return min(
            res.vcpus / self.capacity.vcpus,
            res.memory_mb / self.capacity.memory_mb,
            res.storage_gb / self.capacity.storage_gb,
        )


class PlacementPolicy(Enum):
    FirstFit = "first_fit"
    BestFit = "best_fit"
    Random = "random"


def _best_fit_score(node: ComputeNode, demand: Resources) -> float:
    after = node.residual() - demand
    return (
        after.vcpus / node.capacity.vcpus
        + after.memory_mb / node.capacity.memory_mb
        + after.storage_gb / node.capacity.storage_gb
    )


class VimState:
    """Compute pool plus every VM it hosts. Owned by a single logical
    executor; failed operations leave state untouched."""

    def __init__(self, capacities, delay_model: DelayModel | None = None,
                 metric_model: MetricModel | None = None):
        self.nodes: list[ComputeNode] = []
        for i, cap in enumerate(capacities):
            if not cap.all_positive():
                raise InvalidCapacity(f"node {i}: every dimension must be > 0")
            self.nodes.append(ComputeNode(node_id=f"n{i}", capacity=cap))
        self._by_id = {n.node_id: n for n in self.nodes}
        self.instances: dict[str, VmInstance] = {}
        self.delay_model = delay_model or DelayModel()
        self.metric_model = metric_model or MetricModel()
        self._jitter_rng = random.Random(self.delay_model.seed)
        self._action_counter = 0

    # --- pool -----------------------------------------------------------

    def node(self, node_id: str) -> ComputeNode:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise NoFeasibleNode(f"no such node: {node_id}") from None

    def residuals(self) -> dict[str, Resources]:
        return {n.node_id: n.residual() for n in self.nodes}

    def place(self, demand: Resources, policy: PlacementPolicy,
              rng: random.Random | None = None) -> str:
        """Pick a node for the demand without changing any state."""
        return self.candidate_nodes(demand, policy, rng)[0]

    def candidate_nodes(self, demand: Resources, policy: PlacementPolicy,
                        rng: random.Random | None = None) -> list[str]:
        """All admitting nodes in the policy's preference order."""
        admitting = [
            (i, n) for i, n in enumerate(self.nodes) if n.admits(demand)
        ]
        if not admitting:
            raise NoFeasibleNode(f"no node admits demand {demand.as_dict()}")
        if policy is PlacementPolicy.FirstFit:
            ordered = admitting
        elif policy is PlacementPolicy.BestFit:
            ordered = sorted(
                admitting, key=lambda pair: (_best_fit_score(pair[1], demand), pair[0])
            )
        elif policy is PlacementPolicy.Random:
            if rng is None:
                raise InvalidValue("rng", "random placement needs a seeded generator")
            ordered = rng.sample(admitting, len(admitting))
        else:  # pragma: no cover - enum is closed
            raise InvalidValue("policy", f"unknown policy {policy!r}")
        return [n.node_id for _, n in ordered]

    def allocate(self, node_id: str, instance_id: str, demand: Resources) -> None:
        node = self.node(node_id)
        if instance_id in self.instances or any(
            instance_id in n.allocations for n in self.nodes
        ):
            raise DuplicateInstance(instance_id)
        if not node.admits(demand):
            raise AdmissionViolation(
                f"{node_id} cannot admit {demand.as_dict()}, "
                f"residual {node.residual().as_dict()}"
            )
        node.allocations[instance_id] = demand

    def release(self, instance_id: str) -> None:
        for node in self.nodes:
            if instance_id in node.allocations:
                del node.allocations[instance_id]
                return
        raise NoAllocation(instance_id)

    # --- delays ----------------------------------------------------------

    def _jittered(self, delay_ns: int) -> int:
        jitter = self.delay_model.jitter_pct
        if jitter <= 0 or delay_ns == 0:
            return delay_ns
        u = self._jitter_rng.uniform(-1.0, 1.0)
        return max(0, round(delay_ns * (1.0 + u * jitter / 100.0)))

    def next_action_id(self) -> str:
        self._action_counter += 1
        return f"act-{self._action_counter}"

    # --- lifecycle operations ---------------------------------------------

    def boot_vm(self, pkg: VnfPackage, node_id: str, instance_id: str,
                clock: VirtualClock,
                extra_first_delay_ns: int = 0) -> tuple[VmInstance, list[LifecycleEvent]]:
        """Boot the package's VM on its allocated node.

        Emits OnboardRequested, ImageTransferred, and VmActive; the optional
        extra delay (orchestrator command overhead) lands in the first gap.
        """
        node = self.node(node_id)
        if instance_id not in node.allocations:
            raise NoAllocation(instance_id)
        vnfd = pkg.vnfd
        t0 = clock.now_ns
        t_transferred = t0 + extra_first_delay_ns + self._jittered(
            self.delay_model.transfer_ns(pkg.image_size_mb)
        )
        t_active = t_transferred + self._jittered(self.delay_model.boot_ns(vnfd))

        vm = VmInstance(
            instance_id=instance_id,
            vnf_name=vnfd.name,
            node_id=node_id,
            state=VmState.Booting,
            vnfd=vnfd,
            created_at_ns=t0,
        )
        events = [
            LifecycleEvent(instance_id, vnfd.name, LifecyclePhase.OnboardRequested, t0),
            LifecycleEvent(
                instance_id, vnfd.name, LifecyclePhase.ImageTransferred, t_transferred
            ),
            LifecycleEvent(instance_id, vnfd.name, LifecyclePhase.VmActive, t_active),
        ]
        vm.transition(VmState.Active)
        self.instances[instance_id] = vm
        clock.advance_to(t_active)
        return vm, events

    def instantiate_vnf(self, instance_id: str, clock: VirtualClock,
                        extra_first_delay_ns: int = 0) -> list[LifecycleEvent]:
        """Configure the VNF inside its booted VM and bring it operational."""
        vm = self._require_instance(instance_id)
        if vm.state is not VmState.Active:
            raise WrongState(
                f"{instance_id}: instantiate requires Active, is {vm.state.value}"
            )
        t0 = clock.now_ns
        t_configured = t0 + extra_first_delay_ns + self._jittered(
            self.delay_model.configure_ns(vm.vnfd)
        )
        events = [
            LifecycleEvent(
                instance_id, vm.vnf_name, LifecyclePhase.InstantiateRequested, t0
            ),
            LifecycleEvent(
                instance_id, vm.vnf_name, LifecyclePhase.VnfConfigured, t_configured
            ),
            # operational immediately after configuration: same timestamp,
            # later insertion order
            LifecycleEvent(
                instance_id, vm.vnf_name, LifecyclePhase.VnfOperational, t_configured
            ),
        ]
        vm.transition(VmState.Configuring)
        vm.transition(VmState.Operational)
        clock.advance_to(t_configured)
        return events

    def migrate(self, instance_id: str, target_node: str, clock: VirtualClock,
                action_id: str | None = None,
                extra_first_delay_ns: int = 0) -> list[LifecycleEvent]:
        """Move a VM's allocation to another node, emitting a measurable
        action pair. Delay is memory over transfer rate (first-order live
        migration); migrating onto the same node is a permitted no-op."""
        vm = self._require_instance(instance_id)
        if vm.state is not VmState.Operational:
            raise WrongState(
                f"{instance_id}: migrate requires Operational, is {vm.state.value}"
            )
        action_id = action_id or self.next_action_id()
        t0 = clock.now_ns

        if target_node == vm.node_id:
            t_done = t0 + extra_first_delay_ns
        else:
            node = self.node(target_node)
            demand = Resources.of_flavor(vm.flavor)
            if not node.admits(demand):
                raise NoFeasibleNode(
                    f"{target_node} cannot admit {demand.as_dict()}"
                )
            t_done = t0 + extra_first_delay_ns + self._jittered(
                self.delay_model.transfer_ns(vm.flavor.memory_mb)
            )
            source = self.node(vm.node_id)
            moved = source.allocations.pop(instance_id)
            node.allocations[instance_id] = moved
            vm.transition(VmState.Migrating)
            vm.node_id = target_node
            vm.transition(VmState.Operational)

        events = [
            LifecycleEvent(
                instance_id, vm.vnf_name, LifecyclePhase.ActionExecuted, t0,
                action_id=action_id, action_kind=ActionKind.Migrate,
            ),
            LifecycleEvent(
                instance_id, vm.vnf_name, LifecyclePhase.ActionCompleted, t_done,
                action_id=action_id, action_kind=ActionKind.Migrate,
            ),
        ]
        clock.advance_to(t_done)
        return events

    def terminate(self, instance_id: str, clock: VirtualClock) -> LifecycleEvent:
        vm = self._require_instance(instance_id)
        if vm.state is not VmState.Terminated:
            vm.transition(VmState.Terminated)
        self.release(instance_id)
        return LifecycleEvent(
            instance_id, vm.vnf_name, LifecyclePhase.Terminated, clock.now_ns
        )

    def _require_instance(self, instance_id: str) -> VmInstance:
        try:
            return self.instances[instance_id]
        except KeyError:
            raise NoAllocation(instance_id) from None

    # --- metrics -----------------------------------------------------------

    def _noise(self, instance_id: str, metric: MetricName, at_ns: int) -> float:
        amp = self.metric_model.cpu_noise_amp_pct
        if amp <= 0:
            return 0.0
        rng = random.Random(
            stable_seed(self.metric_model.seed, instance_id, metric.value, at_ns)
        )
        return rng.uniform(-amp, amp)

    def sample_metrics(self, at_ns: int) -> list[MetricSample]:
        """One cpu and one memory sample per live instance, deterministic
        under a fixed metric-model seed."""
        samples = []
        for instance_id in self.instances:
            vm = self.instances[instance_id]
            if vm.state is VmState.Terminated:
                continue
            base = self.metric_model.cpu_base_pct.get(
                vm.vnf_name, self.metric_model.default_cpu_base_pct
            )
            cpu = base + self._noise(instance_id, MetricName.cpu_util_pct, at_ns)
            cpu = min(100.0, max(0.0, cpu))
            memory = self.metric_model.memory_fraction * vm.flavor.memory_mb
            samples.append(
                MetricSample(instance_id, MetricName.cpu_util_pct, at_ns, cpu)
            )
            samples.append(
                MetricSample(instance_id, MetricName.memory_usage_mb, at_ns, memory)
            )
        return samples

    def metric_series(self, instance_id: str, metric: MetricName,
                      end_ns: int) -> list[MetricSample]:
        """Samples at fixed intervals from instance creation to end_ns
        (at least one point)."""
        vm = self._require_instance(instance_id)
        interval = self.metric_model.sample_interval_ns
        out = []
        t = vm.created_at_ns
        while True:
            at_samples = [
                s for s in self.sample_metrics(t)
                if s.instance_id == instance_id and s.metric is metric
            ]
            out.extend(at_samples)
            t += interval
            if t > end_ns:
                break
        return out


def create_pool(capacities, delay_model: DelayModel | None = None,
                metric_model: MetricModel | None = None) -> VimState:
    """Build a pool with deterministic node ids n0..n{k-1}."""
    return VimState(list(capacities), delay_model=delay_model,
                    metric_model=metric_model)
