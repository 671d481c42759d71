"""Uniform target abstraction: in-process sim binding and the HTTP NBI client.

Every driver speaks the same small command set and translates target-native
states onto the shared lifecycle phases; native states that do not map are
kept in an explicit unmapped list, never silently dropped. The metrics
collector mirrors the classic instance -> metric -> measures -> CSV pipeline:
one `<vnf_name>_<metric>.csv` file per instance-metric pair with a
`timestamp,value` header.
"""

from __future__ import annotations

import csv
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import requests

from .descriptors import NsDescriptor, VnfPackage, nsd_to_dict, package_to_dict
from .errors import (
    HttpError,
    InvalidValue,
    MissingPackage,
    NoFeasibleNode,
    ProtocolError,
    Timeout,
    UnknownNs,
    UnknownVnf,
    ValidationFailed,
    WrongState,
)
from .kpi import QodInputs
from .lifecycle import (
    ActionKind,
    LifecycleEvent,
    LifecyclePhase,
    LifecycleTimeline,
)
from .nfvi import MetricName, METRIC_UNITS
from .orchestrator import DecisionTrace, SimOrchestrator
from .resources import Resources

_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)

# deployment phases in their per-instance order, for replaying reported
# histories deterministically
_CHAIN_PHASES = (
    LifecyclePhase.OnboardRequested,
    LifecyclePhase.ImageTransferred,
    LifecyclePhase.VmActive,
    LifecyclePhase.InstantiateRequested,
    LifecyclePhase.VnfConfigured,
    LifecyclePhase.VnfOperational,
    LifecyclePhase.Terminated,
)
_CHAIN_RANK = {p.value: i for i, p in enumerate(_CHAIN_PHASES)}

CLOCK_TARGET = "target-reported"
CLOCK_WALL = "wall"


def rfc3339_from_ns(t_ns: int) -> str:
    """Virtual nanoseconds to an RFC 3339 UTC timestamp (Unix-epoch origin)."""
    dt = _EPOCH + timedelta(
        seconds=t_ns // 1_000_000_000,
        microseconds=(t_ns % 1_000_000_000) // 1000,
    )
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%fZ")


@dataclass(frozen=True)
class Measure:
    timestamp: str  # RFC 3339 UTC
    value: float


@dataclass(frozen=True)
class ActionResult:
    action_id: str
    decision_trace: DecisionTrace | None


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    auth_token: str | None = None
    timeout_ms: int = 10_000
    poll_interval_ms: int = 100
    # "wall": stamp observations on the harness monotonic clock;
    # "target-reported": replay the target's own phase timestamps (exact, used
    # for wire-equivalence checks against virtual-clock targets)
    clock_domain: str = CLOCK_WALL

    def __post_init__(self):
        if self.timeout_ms <= 0:
            raise InvalidValue("timeout_ms", "must be > 0")
        if self.poll_interval_ms <= 0:
            raise InvalidValue("poll_interval_ms", "must be > 0")
        if self.clock_domain not in (CLOCK_WALL, CLOCK_TARGET):
            raise InvalidValue("clock_domain", f"unknown domain {self.clock_domain!r}")


class TargetDriver(ABC):
    """Common command surface every benchmark target is driven through."""

    timeline: LifecycleTimeline
    clock_domain: str

    @abstractmethod
    def onboard_package(self, pkg: VnfPackage) -> str: ...

    @abstractmethod
    def register_nsd(self, nsd: NsDescriptor) -> str: ...

    @abstractmethod
    def instantiate_ns(self, nsd_id: str) -> str: ...

    @abstractmethod
    def scale_out(self, ns_id: str, vnf_name: str) -> ActionResult: ...

    @abstractmethod
    def migrate(self, ns_id: str, vnf_name: str) -> ActionResult: ...

    @abstractmethod
    def terminate_ns(self, ns_id: str) -> None: ...

    @abstractmethod
    def poll_ns_status(self, ns_id: str) -> str: ...

    @abstractmethod
    def list_instances(self) -> list[tuple[str, str]]: ...

    @abstractmethod
    def list_instance_metrics(self, instance_id: str) -> dict[str, str]: ...

    @abstractmethod
    def fetch_measures(self, instance_id: str, metric: str) -> list[Measure]: ...

    def unmapped_states(self) -> list[tuple[str, str]]:
        """Native states that had no lifecycle-phase mapping."""
        return []


def sim_measures(orchestrator: SimOrchestrator, instance_id: str,
                 metric: str) -> list[Measure]:
    series = orchestrator.vim.metric_series(
        instance_id, MetricName(metric), orchestrator.clock.now_ns
    )
    return [Measure(rfc3339_from_ns(s.timestamp_ns), s.value) for s in series]


class SimDriver(TargetDriver):
    """In-process binding: calls map 1:1 onto the simulated orchestrator and
    events pass through unmodified."""

    def __init__(self, orchestrator: SimOrchestrator):
        self.orchestrator = orchestrator
        self.timeline = orchestrator.timeline
        self.clock_domain = orchestrator.timeline.clock_domain

    def onboard_package(self, pkg: VnfPackage) -> str:
        package_id, _ = self.orchestrator.onboard(pkg)
        return package_id

    def register_nsd(self, nsd: NsDescriptor) -> str:
        return self.orchestrator.register_nsd(nsd)

    def instantiate_ns(self, nsd_id: str) -> str:
        ns_id = self.orchestrator.create_ns(nsd_id)
        self.orchestrator.instantiate_ns(ns_id)
        return ns_id

    def scale_out(self, ns_id: str, vnf_name: str) -> ActionResult:
        _, action_id, _, trace = self.orchestrator.scale_out(ns_id, vnf_name)
        return ActionResult(action_id=action_id, decision_trace=trace)

    def migrate(self, ns_id: str, vnf_name: str) -> ActionResult:
        action_id, _, trace = self.orchestrator.migrate_vnf(ns_id, vnf_name)
        return ActionResult(action_id=action_id, decision_trace=trace)

    def terminate_ns(self, ns_id: str) -> None:
        self.orchestrator.terminate_ns(ns_id)

    def poll_ns_status(self, ns_id: str) -> str:
        return self.orchestrator.ns_status(ns_id)

    def list_instances(self) -> list[tuple[str, str]]:
        return self.orchestrator.live_instances()

    def list_instance_metrics(self, instance_id: str) -> dict[str, str]:
        self.orchestrator.vim._require_instance(instance_id)
        return {m.value: METRIC_UNITS[m] for m in MetricName}

    def fetch_measures(self, instance_id: str, metric: str) -> list[Measure]:
        return sim_measures(self.orchestrator, instance_id, metric)


def sim_driver(orchestrator: SimOrchestrator) -> SimDriver:
    return SimDriver(orchestrator)


# --- HTTP client --------------------------------------------------------------

_ERROR_CLASSES = {
    "UnknownNs": UnknownNs,
    "UnknownVnf": UnknownVnf,
    "ValidationFailed": None,  # built specially below
    "NoFeasibleNode": NoFeasibleNode,
    "MissingPackage": MissingPackage,
    "WrongState": WrongState,
}


class NbiClient(TargetDriver):
    """Generic polling client for the wire protocol.

    Wall-clock campaigns stamp every observation on the harness monotonic
    clock, so each timestamp carries a measurement uncertainty of one poll
    interval. Target-reported campaigns replay the timestamps the endpoint
    publishes, which reproduces a virtual-clock target's timeline exactly.
    """

    def __init__(self, config: EndpointConfig):
        self.config = config
        self.clock_domain = config.clock_domain
        self.timeline = LifecycleTimeline(clock_domain=config.clock_domain)
        self._session = requests.Session()
        if config.auth_token:
            self._session.headers["Authorization"] = f"Bearer {config.auth_token}"
        self._base = config.base_url.rstrip("/")
        self._seen_phases: dict[str, set[str]] = {}
        self._tracked_ns: list[str] = []
        self._unmapped: list[tuple[str, str]] = []

    # --- plumbing -------------------------------------------------------

    def _now_ns(self) -> int:
        return time.monotonic_ns()

    def _request(self, method: str, path: str, body=None, params=None):
        url = self._base + path
        try:
            resp = self._session.request(
                method, url, json=body, params=params,
                timeout=self.config.timeout_ms / 1000.0,
            )
        except requests.Timeout as exc:
            raise Timeout(f"{method} {path}: no answer within "
                          f"{self.config.timeout_ms} ms") from exc
        except requests.ConnectionError as exc:
            raise Timeout(f"{method} {path}: endpoint unreachable") from exc
        if resp.status_code >= 400:
            self._raise_for_error(resp)
        if resp.status_code == 204 or not resp.content:
            return None
        try:
            return resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{method} {path}: body is not JSON") from exc

    def _raise_for_error(self, resp):
        code = detail = None
        try:
            doc = resp.json()
            code = doc.get("error")
            detail = doc.get("detail", "")
        except ValueError:
            pass
        if code == "ValidationFailed":
            raise ValidationFailed([detail])
        cls = _ERROR_CLASSES.get(code)
        if cls is not None:
            raise cls(detail or code)
        raise HttpError(resp.status_code, detail or resp.reason or "")

    def _expect(self, doc, key: str):
        if not isinstance(doc, dict) or key not in doc:
            raise ProtocolError(f"response missing {key!r}: {doc!r}")
        return doc[key]

    def _record(self, instance_id: str, vnf_name: str, phase_name: str,
                reported_ns: int, observed_ns: int,
                action_id=None, action_kind=None) -> None:
        seen = self._seen_phases.setdefault(instance_id, set())
        key = phase_name if action_id is None else f"{phase_name}:{action_id}"
        if key in seen:
            return
        seen.add(key)
        stamp = reported_ns if self.clock_domain == CLOCK_TARGET else observed_ns
        self.timeline.record_event(
            LifecycleEvent(
                instance_id, vnf_name, LifecyclePhase(phase_name), stamp,
                action_id=action_id, action_kind=action_kind,
            )
        )

    def _sync_ns(self, ns_id: str) -> str:
        """Fetch a service view and emit every newly observed phase."""
        doc = self._request("GET", f"/ns_instances/{ns_id}")
        observed_ns = self._now_ns()
        state = self._expect(doc, "state")
        for vnf in self._expect(doc, "vnfs"):
            instance_id = self._expect(vnf, "instance_id")
            vnf_name = self._expect(vnf, "name")
            stamps = self._expect(vnf, "phase_timestamps")
            if not isinstance(stamps, dict):
                raise ProtocolError(f"phase_timestamps not an object: {stamps!r}")
            known = [
                (ts, _CHAIN_RANK[name], name)
                for name, ts in stamps.items()
                if name in _CHAIN_RANK
            ]
            for name in stamps:
                if name not in _CHAIN_RANK:
                    self._unmapped.append((instance_id, name))
            for ts, _, name in sorted(known):
                self._record(instance_id, vnf_name, name, ts, observed_ns)
        return state

    def _poll_until(self, describe: str, fetch, done):
        deadline = time.monotonic() + self.config.timeout_ms / 1000.0
        while True:
            value = fetch()
            if done(value):
                return value
            if time.monotonic() >= deadline:
                raise Timeout(f"{describe}: not done within "
                              f"{self.config.timeout_ms} ms")
            time.sleep(self.config.poll_interval_ms / 1000.0)

    # --- driver surface ------------------------------------------------------

    def onboard_package(self, pkg: VnfPackage) -> str:
        doc = self._request("POST", "/packages", body=package_to_dict(pkg))
        return self._expect(doc, "id")

    def register_nsd(self, nsd: NsDescriptor) -> str:
        doc = self._request("POST", "/ns_descriptors", body=nsd_to_dict(nsd))
        return self._expect(doc, "id")

    def instantiate_ns(self, nsd_id: str) -> str:
        doc = self._request("POST", "/ns_instances", body={"nsd_id": nsd_id})
        ns_id = self._expect(doc, "id")
        self._tracked_ns.append(ns_id)
        self._request("POST", f"/ns_instances/{ns_id}/instantiate")
        self._poll_until(
            f"instantiate {ns_id}",
            lambda: self._sync_ns(ns_id),
            lambda state: state == "Operational",
        )
        return ns_id

    def _run_action(self, ns_id: str, body: dict, kind: ActionKind) -> ActionResult:
        dispatch_ns = self._now_ns()
        doc = self._request("POST", f"/ns_instances/{ns_id}/scale", body=body)
        op_id = self._expect(doc, "op_id")
        op = self._poll_until(
            f"operation {op_id}",
            lambda: self._request("GET", f"/operations/{op_id}"),
            lambda op_doc: op_doc.get("state") in ("COMPLETED", "FAILED"),
        )
        observed_ns = self._now_ns()
        instance_id = self._expect(op, "instance_id")
        vnf_name = self._expect(op, "vnf_name")
        # pick up the replica's (or migrated VM's) phase history first so the
        # action pair is judged against a complete view
        self._sync_ns(ns_id)
        if self.clock_domain == CLOCK_TARGET:
            executed = self._expect(op, "executed_at")
            completed = self._expect(op, "completed_at")
        else:
            executed, completed = dispatch_ns, observed_ns
        self._record(instance_id, vnf_name, LifecyclePhase.ActionExecuted.value,
                     executed, dispatch_ns, action_id=op_id, action_kind=kind)
        self._record(instance_id, vnf_name, LifecyclePhase.ActionCompleted.value,
                     completed, observed_ns, action_id=op_id, action_kind=kind)
        trace = _trace_from_dict(op.get("decision_trace"))
        return ActionResult(action_id=op_id, decision_trace=trace)

    def scale_out(self, ns_id: str, vnf_name: str) -> ActionResult:
        return self._run_action(
            ns_id, {"kind": "SCALE_OUT", "vnf_name": vnf_name}, ActionKind.ScaleOut
        )

    def migrate(self, ns_id: str, vnf_name: str) -> ActionResult:
        return self._run_action(
            ns_id, {"kind": "MIGRATE", "vnf_name": vnf_name}, ActionKind.Migrate
        )

    def terminate_ns(self, ns_id: str) -> None:
        self._sync_ns(ns_id)
        self._request("DELETE", f"/ns_instances/{ns_id}")

    def poll_ns_status(self, ns_id: str) -> str:
        return self._sync_ns(ns_id)

    def list_instances(self) -> list[tuple[str, str]]:
        doc = self._request("GET", "/instances")
        if not isinstance(doc, list):
            raise ProtocolError(f"expected list of instances, got {doc!r}")
        return [(self._expect(i, "id"), self._expect(i, "name")) for i in doc]

    def list_instance_metrics(self, instance_id: str) -> dict[str, str]:
        doc = self._request("GET", f"/instances/{instance_id}/metrics")
        if not isinstance(doc, dict):
            raise ProtocolError(f"expected metric map, got {doc!r}")
        return doc

    def fetch_measures(self, instance_id: str, metric: str) -> list[Measure]:
        doc = self._request(
            "GET", f"/metrics/{instance_id}/measures", params={"metric": metric}
        )
        if not isinstance(doc, list):
            raise ProtocolError(f"expected measure rows, got {doc!r}")
        measures = []
        for row in doc:
            if not isinstance(row, (list, tuple)) or len(row) != 2:
                raise ProtocolError(f"bad measure row: {row!r}")
            measures.append(Measure(str(row[0]), float(row[1])))
        return measures

    def unmapped_states(self) -> list[tuple[str, str]]:
        return list(self._unmapped)


def nbi_client(config: EndpointConfig) -> NbiClient:
    return NbiClient(config)


def _trace_from_dict(doc) -> DecisionTrace | None:
    if doc is None:
        return None
    qi = doc.get("qod_inputs", {})
    inputs = QodInputs(
        required_short=Resources.from_dict(qi["required_short"]),
        required_long=Resources.from_dict(qi["required_long"]),
        offered_residual=Resources.from_dict(qi["offered_residual"]),
        colocated_headroom_before=dict(qi.get("colocated_headroom_before", {})),
        colocated_headroom_after=dict(qi.get("colocated_headroom_after", {})),
        attempts=qi["attempts"],
        decision_latency_ns=qi["decision_latency_ns"],
    )
    return DecisionTrace(
        action_id=doc["action_id"],
        candidate_nodes_considered=tuple(doc["candidate_nodes_considered"]),
        attempts=doc["attempts"],
        chosen_node=doc["chosen_node"],
        decision_latency_ns=doc["decision_latency_ns"],
        qod_inputs=inputs,
    )


def trace_to_dict(trace: DecisionTrace) -> dict:
    qi = trace.qod_inputs
    return {
        "action_id": trace.action_id,
        "candidate_nodes_considered": list(trace.candidate_nodes_considered),
        "attempts": trace.attempts,
        "chosen_node": trace.chosen_node,
        "decision_latency_ns": trace.decision_latency_ns,
        "qod_inputs": {
            "required_short": qi.required_short.as_dict(),
            "required_long": qi.required_long.as_dict(),
            "offered_residual": qi.offered_residual.as_dict(),
            "colocated_headroom_before": dict(qi.colocated_headroom_before),
            "colocated_headroom_after": dict(qi.colocated_headroom_after),
            "attempts": qi.attempts,
            "decision_latency_ns": qi.decision_latency_ns,
        },
    }


# --- metrics collection ---------------------------------------------------------


def collect_metrics(driver: TargetDriver, out_dir) -> list[Path]:
    """Dump every instance-metric series to `<vnf_name>_<metric>.csv`.

    Files are written in deterministic (instance, metric) order; when several
    instances share a VNF name (scale-out replicas) later ones fall back to
    their unique instance id so no series is clobbered.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    used_names: set[str] = set()
    for instance_id, vnf_name in driver.list_instances():
        base = vnf_name if vnf_name not in used_names else instance_id
        used_names.add(vnf_name)
        for metric in driver.list_instance_metrics(instance_id):
            measures = driver.fetch_measures(instance_id, metric)
            _check_non_decreasing(measures, instance_id, metric)
            path = out / f"{base}_{metric}.csv"
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["timestamp", "value"])
                for m in measures:
                    writer.writerow([m.timestamp, repr(m.value)])
            written.append(path)
    return written


def read_measures_csv(path) -> list[Measure]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["timestamp", "value"]:
            raise ProtocolError(f"{path}: unexpected header {header!r}")
        return [Measure(row[0], float(row[1])) for row in reader]


def _check_non_decreasing(measures, instance_id, metric) -> None:
    for earlier, later in zip(measures, measures[1:]):
        if later.timestamp < earlier.timestamp:
            raise ProtocolError(
                f"{instance_id}/{metric}: timestamps decrease "
                f"({earlier.timestamp} -> {later.timestamp})"
            )
