"""Campaign configuration and execution.

A campaign config is one JSON document naming a target (simulated or HTTP
endpoint), descriptors (built-in fixture or files), an ordered action list,
and the report options. Repetitions run sequentially with fresh simulator
state so no run contaminates the next; the service is always terminated at
the end of a repetition, even when an action failed, so the pool drains.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from .capability import BUILTIN_MANIFESTS, CapabilityManifest, manifest_from_dict
from .descriptors import (
    NsDescriptor,
    VnfPackage,
    builtin_vcpe,
    nsd_from_dict,
    package_from_dict,
)
from .drivers import (
    EndpointConfig,
    NbiClient,
    SimDriver,
    TargetDriver,
    collect_metrics,
)
from .errors import (
    InvalidValue,
    ManobenchError,
    MissingField,
)
from .kpi import AggregateMode, EQUAL_WEIGHTS, DEFAULT_TAU_NS
from .lifecycle import LifecycleTimeline
from .nfvi import DelayModel, MetricModel, PlacementPolicy, VimState
from .orchestrator import OrchestratorConfig, SimOrchestrator
from .report import build_report
from .resources import Resources

log = logging.getLogger("manobench.campaign")

ACTION_KINDS = ("scale_out", "migrate", "terminate")

DEFAULT_POOL = [Resources(vcpus=32, memory_mb=65536, storage_gb=1000)]


@dataclass(frozen=True)
class CampaignAction:
    kind: str
    vnf_name: str | None = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise InvalidValue("actions", f"unknown action kind {self.kind!r}")
        if self.kind in ("scale_out", "migrate") and not self.vnf_name:
            raise MissingField(f"actions[{self.kind}].vnf_name")


@dataclass
class CampaignConfig:
    campaign_name: str
    target_kind: str  # "sim" | "http"
    nsd: NsDescriptor
    packages: list[VnfPackage]
    actions: list[CampaignAction]
    repetitions: int
    seed: int
    aggregate_modes: list[AggregateMode]
    qod_weights: tuple
    qod_tau_ns: int
    manifest: CapabilityManifest | None
    # sim target
    pool: list[Resources] = field(default_factory=list)
    delay_model: DelayModel = field(default_factory=DelayModel)
    metric_model: MetricModel = field(default_factory=MetricModel)
    orchestrator: OrchestratorConfig = field(default_factory=OrchestratorConfig)
    # http target
    endpoint: EndpointConfig | None = None
    digest: str = ""


def _config_digest(doc: dict, seed: int, repetitions: int) -> str:
    resolved = dict(doc)
    resolved["seed"] = seed
    resolved["repetitions"] = repetitions
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _load_descriptors(doc, base_dir: Path):
    if "fixture" in doc:
        if doc["fixture"] != "vcpe":
            raise InvalidValue("descriptors.fixture", doc["fixture"])
        return builtin_vcpe()
    nsd_path = base_dir / doc["nsd"] if "nsd" in doc else None
    if nsd_path is None:
        raise MissingField("descriptors.nsd")
    package_paths = [base_dir / p for p in doc.get("packages", [])]
    for p in [nsd_path, *package_paths]:
        if not p.exists():
            raise InvalidValue("descriptors", f"file not found: {p}")
    packages = [
        package_from_dict(json.loads(p.read_text())) for p in package_paths
    ]
    nsd = nsd_from_dict(
        json.loads(nsd_path.read_text()), [p.vnfd for p in packages]
    )
    return nsd, packages


def _load_manifest(value, base_dir: Path) -> CapabilityManifest | None:
    if value is None:
        return None
    if isinstance(value, dict):
        return manifest_from_dict(value)
    if isinstance(value, str):
        if value.startswith("builtin:"):
            name = value.split(":", 1)[1]
            if name not in BUILTIN_MANIFESTS:
                raise InvalidValue("capability_manifest", f"unknown builtin {name!r}")
            return BUILTIN_MANIFESTS[name]()
        path = base_dir / value
        if not path.exists():
            raise InvalidValue("capability_manifest", f"file not found: {path}")
        return manifest_from_dict(json.loads(path.read_text()))
    raise InvalidValue("capability_manifest", f"unsupported value {value!r}")


def _delay_model_from(doc: dict, seed: int) -> DelayModel:
    if doc.get("defaults"):
        base = DelayModel.defaults(seed=doc.get("seed", seed))
        overrides = {k: v for k, v in doc.items() if k != "defaults"}
        return replace(base, **overrides) if overrides else base
    doc = dict(doc)
    doc.setdefault("seed", seed)
    return DelayModel(**doc)


def load_campaign_config(path_or_doc, seed_override: int | None = None,
                         repetitions_override: int | None = None) -> CampaignConfig:
    """Load and validate a campaign config from a JSON file or a dict."""
    if isinstance(path_or_doc, (str, Path)):
        path = Path(path_or_doc)
        base_dir = path.parent
        doc = json.loads(path.read_text())
    else:
        base_dir = Path(".")
        doc = dict(path_or_doc)
    if not isinstance(doc, dict):
        raise InvalidValue("config", "top-level value must be an object")

    seed = seed_override if seed_override is not None else doc.get("seed", 0)
    repetitions = (
        repetitions_override
        if repetitions_override is not None
        else doc.get("repetitions", 1)
    )
    if repetitions < 1:
        raise InvalidValue("repetitions", "must be >= 1")

    target = doc.get("target", {"kind": "sim"})
    target_kind = target.get("kind")
    if target_kind not in ("sim", "http"):
        raise InvalidValue("target.kind", f"must be sim or http, got {target_kind!r}")

    nsd, packages = _load_descriptors(doc.get("descriptors", {"fixture": "vcpe"}),
                                      base_dir)

    actions = [
        CampaignAction(kind=a.get("kind", ""), vnf_name=a.get("vnf_name"))
        for a in doc.get("actions", [])
    ]

    modes = []
    for name in doc.get("aggregate_modes", ["Sum", "Mean"]):
        try:
            modes.append(AggregateMode(name))
        except ValueError:
            raise InvalidValue("aggregate_modes", f"unknown mode {name!r}") from None

    qod_doc = doc.get("qod", {})
    weights = tuple(qod_doc.get("weights", EQUAL_WEIGHTS))
    tau_ns = qod_doc.get("tau_ns", DEFAULT_TAU_NS)

    config = CampaignConfig(
        campaign_name=doc.get("campaign_name", "campaign"),
        target_kind=target_kind,
        nsd=nsd,
        packages=packages,
        actions=actions,
        repetitions=repetitions,
        seed=seed,
        aggregate_modes=modes,
        qod_weights=weights,
        qod_tau_ns=tau_ns,
        manifest=_load_manifest(doc.get("capability_manifest"), base_dir),
        digest=_config_digest(doc, seed, repetitions),
    )

    if target_kind == "sim":
        pool_doc = target.get("pool")
        config.pool = (
            [Resources.from_dict(n) for n in pool_doc]
            if pool_doc
            else list(DEFAULT_POOL)
        )
        config.delay_model = _delay_model_from(target.get("delay_model",
                                                          {"defaults": True}), seed)
        metric_doc = dict(target.get("metric_model", {}))
        metric_doc.setdefault("seed", seed)
        config.metric_model = MetricModel(**metric_doc)
        orch_doc = dict(target.get("orchestrator", {}))
        if "placement_policy" in orch_doc:
            orch_doc["placement_policy"] = PlacementPolicy(
                orch_doc["placement_policy"]
            )
        if "fault_plan" in orch_doc:
            orch_doc["fault_plan"] = {
                int(k): int(v) for k, v in orch_doc["fault_plan"].items()
            }
        if "qod_horizon_ns" in orch_doc:
            orch_doc["qod_horizon_ns"] = tuple(orch_doc["qod_horizon_ns"])
        config.orchestrator = OrchestratorConfig(**orch_doc)
    else:
        endpoint_doc = target.get("endpoint")
        if not endpoint_doc:
            raise MissingField("target.endpoint")
        config.endpoint = EndpointConfig(**endpoint_doc)

    return config


def build_sim_orchestrator(config: CampaignConfig) -> SimOrchestrator:
    vim = VimState(
        config.pool,
        delay_model=config.delay_model,
        metric_model=config.metric_model,
    )
    return SimOrchestrator(config.orchestrator, vim)


def build_driver(config: CampaignConfig) -> TargetDriver:
    if config.target_kind == "sim":
        return SimDriver(build_sim_orchestrator(config))
    return NbiClient(config.endpoint)


@dataclass
class RepetitionData:
    timeline: LifecycleTimeline
    actions: list  # (action_id, kind_value, vnf_name, trace)
    utilization: dict  # (vnf_name, metric) -> [values]
    metric_files: list
    error: str | None = None


def _collect_utilization(driver: TargetDriver) -> dict:
    rows: dict[tuple[str, str], list[float]] = {}
    for instance_id, vnf_name in driver.list_instances():
        for metric in driver.list_instance_metrics(instance_id):
            measures = driver.fetch_measures(instance_id, metric)
            rows.setdefault((vnf_name, metric), []).extend(
                m.value for m in measures
            )
    return rows


def run_repetition(driver: TargetDriver, config: CampaignConfig,
                   metrics_dir) -> RepetitionData:
    """One full pass: onboard, instantiate, actions, metrics, terminate."""
    data = RepetitionData(
        timeline=driver.timeline, actions=[], utilization={}, metric_files=[]
    )
    ns_id = None
    terminated = False
    try:
        for pkg in config.packages:
            driver.onboard_package(pkg)
        nsd_id = driver.register_nsd(config.nsd)
        ns_id = driver.instantiate_ns(nsd_id)
        for action in config.actions:
            if action.kind == "scale_out":
                result = driver.scale_out(ns_id, action.vnf_name)
                data.actions.append(
                    (result.action_id, "ScaleOut", action.vnf_name,
                     result.decision_trace)
                )
            elif action.kind == "migrate":
                result = driver.migrate(ns_id, action.vnf_name)
                data.actions.append(
                    (result.action_id, "Migrate", action.vnf_name,
                     result.decision_trace)
                )
            elif action.kind == "terminate":
                driver.terminate_ns(ns_id)
                terminated = True
        data.metric_files = collect_metrics(driver, metrics_dir)
        data.utilization = _collect_utilization(driver)
    except ManobenchError as exc:
        log.warning("repetition failed: %s", exc)
        data.error = str(exc)
    finally:
        if ns_id is not None and not terminated:
            try:
                driver.terminate_ns(ns_id)
            except ManobenchError as exc:
                log.debug("cleanup terminate skipped: %s", exc)
    return data


def run_campaign(config: CampaignConfig, out_dir) -> dict:
    """Execute all repetitions and assemble the report dict."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    reps: list[RepetitionData] = []
    for rep_index in range(config.repetitions):
        driver = build_driver(config)  # fresh state per repetition
        metrics_dir = out / "metrics" / f"rep{rep_index}"
        reps.append(run_repetition(driver, config, metrics_dir))

    clock_domain = reps[0].timeline.clock_domain if reps else "virtual"
    incomplete = any(r.error for r in reps)
    return build_report(
        campaign_name=config.campaign_name,
        target_kind=config.target_kind,
        clock_domain=clock_domain,
        seed=config.seed,
        config_digest=config.digest,
        nsd=config.nsd,
        repetitions_data=reps,
        aggregate_modes=config.aggregate_modes,
        qod_weights=config.qod_weights,
        qod_tau_ns=config.qod_tau_ns,
        manifest=config.manifest,
        incomplete=incomplete,
        warnings=[],
    )
