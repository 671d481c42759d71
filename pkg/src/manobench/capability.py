"""Functional-KPI data model: capability manifests, footprints, comparison.

A manifest captures the non-run-time characteristics of a MANO target: the
resource footprint its installation claims, the VIM platforms it can attach,
and a fixed palette of feature keys. Comparison emits a deterministic matrix
plus per-dimension footprint ratios.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import DivisionByZeroDimension, InvalidValue


class VimPlatform(Enum):
    OpenStack = "OpenStack"
    VMware = "VMware"
    AWS = "AWS"
    OpenVIM = "OpenVIM"
    Other = "Other"


class FeatureStatus(Enum):
    Supported = "Supported"
    Unsupported = "Unsupported"
    Untested = "Untested"


FEATURE_KEYS = (
    "bare_metal_install",
    "kubernetes_install",
    "performance_monitoring",
    "cli",
    "lcm_scaling",
    "multi_user",
    "multi_site",
)


@dataclass(frozen=True)
class Footprint:
    vcpus: float
    memory_gb: float
    storage_gb: float
    ip_addresses: float

    def __post_init__(self):
        for dim in ("vcpus", "memory_gb", "storage_gb", "ip_addresses"):
            if getattr(self, dim) < 0:
                raise InvalidValue(dim, "must be >= 0")


@dataclass(frozen=True)
class CapabilityManifest:
    target_name: str
    footprint: Footprint
    vim_platforms: frozenset[VimPlatform] = frozenset()
    features: Mapping[str, FeatureStatus] = field(default_factory=dict)
    max_monitored_vnfs: int | None = None  # claimed only; no measurement procedure

    def feature(self, key: str) -> FeatureStatus:
        return self.features.get(key, FeatureStatus.Untested)


_RATIO_DIMS = {
    "vcpus": "vcpus",
    "memory": "memory_gb",
    "storage": "storage_gb",
    "ip": "ip_addresses",
}


def footprint_ratio(a: CapabilityManifest, b: CapabilityManifest) -> dict[str, float]:
    """Per-dimension footprint ratios a/b as {vcpus, memory, storage, ip}."""
    ratios = {}
    for key, attr in _RATIO_DIMS.items():
        denom = getattr(b.footprint, attr)
        if denom <= 0:
            raise DivisionByZeroDimension(key)
        ratios[key] = getattr(a.footprint, attr) / denom
    return ratios


@dataclass(frozen=True)
class MatrixRow:
    key: str
    a_status: FeatureStatus
    b_status: FeatureStatus


@dataclass(frozen=True)
class ComparisonMatrix:
    a_name: str
    b_name: str
    rows: tuple[MatrixRow, ...]

    def row(self, key: str) -> MatrixRow:
        for r in self.rows:
            if r.key == key:
                return r
        raise KeyError(key)

    def to_csv(self) -> str:
        lines = [f"criterion,{self.a_name},{self.b_name}"]
        for r in self.rows:
            lines.append(f"{r.key},{r.a_status.value},{r.b_status.value}")
        return "\n".join(lines) + "\n"


def _vim_status(manifest: CapabilityManifest, platform: VimPlatform) -> FeatureStatus:
    if not manifest.vim_platforms:
        return FeatureStatus.Untested
    return (
        FeatureStatus.Supported
        if platform in manifest.vim_platforms
        else FeatureStatus.Unsupported
    )


def _multi_vim_status(manifest: CapabilityManifest) -> FeatureStatus:
    if not manifest.vim_platforms:
        return FeatureStatus.Untested
    return (
        FeatureStatus.Supported
        if len(manifest.vim_platforms) > 1
        else FeatureStatus.Unsupported
    )


def compare_capabilities(
    a: CapabilityManifest, b: CapabilityManifest
) -> ComparisonMatrix:
    """Feature-by-feature matrix. Row order is fixed: the declared feature
    palette, then multi-VIM support, then one row per VIM platform.
    Feature keys absent from a manifest read as Untested."""
    rows = [
        MatrixRow(key, a.feature(key), b.feature(key)) for key in FEATURE_KEYS
    ]
    rows.append(MatrixRow("multi_vim", _multi_vim_status(a), _multi_vim_status(b)))
    for platform in VimPlatform:
        rows.append(
            MatrixRow(
                f"vim:{platform.value}",
                _vim_status(a, platform),
                _vim_status(b, platform),
            )
        )
    return ComparisonMatrix(a_name=a.target_name, b_name=b.target_name,
                            rows=tuple(rows))


# --- built-in manifests for the studied releases -------------------------------

def osm4_manifest() -> CapabilityManifest:
    return CapabilityManifest(
        target_name="OSM-4",
        footprint=Footprint(vcpus=2, memory_gb=8, storage_gb=40, ip_addresses=1),
        vim_platforms=frozenset(
            {VimPlatform.OpenStack, VimPlatform.VMware, VimPlatform.AWS,
             VimPlatform.OpenVIM}
        ),
        features={
            "bare_metal_install": FeatureStatus.Supported,
            "kubernetes_install": FeatureStatus.Unsupported,
            "performance_monitoring": FeatureStatus.Supported,
            "cli": FeatureStatus.Supported,
            "lcm_scaling": FeatureStatus.Unsupported,
            "multi_user": FeatureStatus.Supported,
            "multi_site": FeatureStatus.Untested,
        },
    )


def onap_b_manifest() -> CapabilityManifest:
    # 20 floating + 3 static addresses
    return CapabilityManifest(
        target_name="ONAP-B",
        footprint=Footprint(vcpus=88, memory_gb=176, storage_gb=1760,
                            ip_addresses=23),
        vim_platforms=frozenset({VimPlatform.OpenStack}),
        features={
            "bare_metal_install": FeatureStatus.Unsupported,
            "kubernetes_install": FeatureStatus.Supported,
            "performance_monitoring": FeatureStatus.Supported,
            "cli": FeatureStatus.Supported,
            "lcm_scaling": FeatureStatus.Unsupported,
            "multi_user": FeatureStatus.Supported,
            "multi_site": FeatureStatus.Untested,
        },
    )


def osm5_manifest() -> CapabilityManifest:
    # claimed footprint only; ip_addresses unstated, kept at a neutral 1
    return CapabilityManifest(
        target_name="OSM-5",
        footprint=Footprint(vcpus=2, memory_gb=4, storage_gb=20, ip_addresses=1),
        vim_platforms=frozenset(
            {VimPlatform.OpenStack, VimPlatform.VMware, VimPlatform.AWS,
             VimPlatform.OpenVIM}
        ),
    )


def onap_c_openstack_manifest() -> CapabilityManifest:
    return CapabilityManifest(
        target_name="ONAP-C (OpenStack)",
        footprint=Footprint(vcpus=88, memory_gb=176, storage_gb=1760,
                            ip_addresses=1),
        vim_platforms=frozenset(
            {VimPlatform.OpenStack, VimPlatform.VMware, VimPlatform.Other}
        ),
    )


def onap_c_kubernetes_manifest() -> CapabilityManifest:
    return CapabilityManifest(
        target_name="ONAP-C (Kubernetes)",
        footprint=Footprint(vcpus=112, memory_gb=224, storage_gb=160,
                            ip_addresses=1),
        vim_platforms=frozenset(
            {VimPlatform.OpenStack, VimPlatform.VMware, VimPlatform.Other}
        ),
    )


BUILTIN_MANIFESTS = {
    "osm4": osm4_manifest,
    "onap-b": onap_b_manifest,
    "osm5": osm5_manifest,
    "onap-c-openstack": onap_c_openstack_manifest,
    "onap-c-kubernetes": onap_c_kubernetes_manifest,
}


def manifest_to_dict(m: CapabilityManifest) -> dict:
    doc = {
        "target_name": m.target_name,
        "footprint": {
            "vcpus": m.footprint.vcpus,
            "memory_gb": m.footprint.memory_gb,
            "storage_gb": m.footprint.storage_gb,
            "ip_addresses": m.footprint.ip_addresses,
        },
        "vim_platforms": sorted(p.value for p in m.vim_platforms),
        "features": {k: m.features[k].value for k in sorted(m.features)},
    }
    if m.max_monitored_vnfs is not None:
        doc["max_monitored_vnfs"] = m.max_monitored_vnfs
    return doc


def manifest_from_dict(doc: Mapping) -> CapabilityManifest:
    fp = doc.get("footprint", {})
    return CapabilityManifest(
        target_name=doc.get("target_name", "unnamed"),
        footprint=Footprint(
            vcpus=fp.get("vcpus", 0),
            memory_gb=fp.get("memory_gb", 0),
            storage_gb=fp.get("storage_gb", 0),
            ip_addresses=fp.get("ip_addresses", 0),
        ),
        vim_platforms=frozenset(
            VimPlatform(p) for p in doc.get("vim_platforms", [])
        ),
        features={
            k: FeatureStatus(v) for k, v in doc.get("features", {}).items()
        },
        max_monitored_vnfs=doc.get("max_monitored_vnfs"),
    )
