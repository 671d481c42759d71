"""VNF/NS descriptor model: parsing, validation, serialization, built-in fixture.

Descriptor documents are JSON (UTF-8). A VNFD carries id, name, image_ref,
flavor{name,vcpus,memory_mb,storage_gb}, connection_points[] and an optional
complexity_hint (count of internal services, >= 1). An NSD carries id, name,
constituent_vnfds[], virtual_links[{name,endpoints[]}] and forwarding_graph[].
Virtual-link endpoints use the form "<vnfd_id>.<connection_point>".

The forwarding graph is a simple ordered chain, not a general DAG.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import (
    DuplicateGraphEntry,
    InvalidValue,
    MalformedDocument,
    MissingField,
    UnresolvedReference,
)

VCPE_COMPONENT_NAMES = ("vBNG", "vGDHCP", "vBRG", "vGMUX", "vInfra")

# Components with several internal services boot and configure slower; the
# hint scales the simulator's per-service delays.
_COMPLEX_COMPONENTS = {"vInfra", "vBNG"}
_DEFAULT_IMAGE_SIZE_MB = 1024


class ImageFormat(Enum):
    QCOW2 = "QCOW2"
    RAW = "RAW"


SUPPORTED_IMAGE_FORMATS = frozenset(ImageFormat)


@dataclass(frozen=True)
class ResourceFlavor:
    """Named resource footprint of a single VM (e.g. "m1.medium")."""

    name: str
    vcpus: int
    memory_mb: int
    storage_gb: int

    def __post_init__(self):
        if self.vcpus < 1:
            raise InvalidValue("vcpus", "must be >= 1")
        if self.memory_mb < 1:
            raise InvalidValue("memory_mb", "must be >= 1")
        if self.storage_gb < 0:
            raise InvalidValue("storage_gb", "must be >= 0")


@dataclass(frozen=True)
class VnfDescriptor:
    id: str
    name: str
    image_ref: str
    flavor: ResourceFlavor
    connection_points: tuple[str, ...] = ()
    complexity_hint: int = 1

    def __post_init__(self):
        if self.complexity_hint < 1:
            raise InvalidValue("complexity_hint", "must be >= 1")
        if len(set(self.connection_points)) != len(self.connection_points):
            raise InvalidValue("connection_points", "names must be unique")


@dataclass(frozen=True)
class VirtualLink:
    name: str
    endpoints: tuple[str, ...]


@dataclass(frozen=True)
class NsDescriptor:
    id: str
    name: str
    constituent_vnfds: tuple[str, ...]
    virtual_links: tuple[VirtualLink, ...] = ()
    forwarding_graph: tuple[str, ...] = ()

    def __post_init__(self):
        if len(set(self.forwarding_graph)) != len(self.forwarding_graph):
            raise InvalidValue("forwarding_graph", "duplicate entries")
        missing = [v for v in self.forwarding_graph if v not in self.constituent_vnfds]
        if missing:
            raise InvalidValue(
                "forwarding_graph", f"entries not in constituent_vnfds: {missing}"
            )


@dataclass(frozen=True)
class VnfPackage:
    """A VNFD plus the image metadata it ships with.

    Deliberately constructible with out-of-range values: packages arrive from
    the outside world and are checked by validate_package, which reports
    violations as data instead of raising.
    """

    vnfd: VnfDescriptor
    image_name: str
    image_size_mb: int = _DEFAULT_IMAGE_SIZE_MB
    image_format: ImageFormat = ImageFormat.QCOW2


@dataclass(frozen=True)
class Violation:
    code: str
    detail: str

    def __str__(self):
        return f"{self.code}: {self.detail}"


def _require(doc: Mapping, key: str, ctx: str = ""):
    if key not in doc:
        raise MissingField(f"{ctx}{key}")
    return doc[key]


def _as_int(value, fieldname: str) -> int:
    # bool is an int subclass; reject it explicitly
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidValue(fieldname, f"expected integer, got {value!r}")
    return value


def _as_str(value, fieldname: str) -> str:
    if not isinstance(value, str):
        raise InvalidValue(fieldname, f"expected string, got {value!r}")
    return value


def _load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("top-level value must be an object")
    return doc


def flavor_from_dict(doc: Mapping, ctx: str = "flavor.") -> ResourceFlavor:
    return ResourceFlavor(
        name=_as_str(_require(doc, "name", ctx), ctx + "name"),
        vcpus=_as_int(_require(doc, "vcpus", ctx), ctx + "vcpus"),
        memory_mb=_as_int(_require(doc, "memory_mb", ctx), ctx + "memory_mb"),
        storage_gb=_as_int(_require(doc, "storage_gb", ctx), ctx + "storage_gb"),
    )


def vnfd_from_dict(doc: Mapping) -> VnfDescriptor:
    flavor_doc = _require(doc, "flavor")
    if not isinstance(flavor_doc, Mapping):
        raise InvalidValue("flavor", "expected object")
    cps = doc.get("connection_points", [])
    if not isinstance(cps, list) or not all(isinstance(c, str) for c in cps):
        raise InvalidValue("connection_points", "expected list of strings")
    hint = doc.get("complexity_hint", 1)
    return VnfDescriptor(
        id=_as_str(_require(doc, "id"), "id"),
        name=_as_str(_require(doc, "name"), "name"),
        image_ref=_as_str(_require(doc, "image_ref"), "image_ref"),
        flavor=flavor_from_dict(flavor_doc),
        connection_points=tuple(cps),
        complexity_hint=_as_int(hint, "complexity_hint"),
    )


def parse_vnfd(text: str) -> VnfDescriptor:
    """Parse a VNFD document; raises MalformedDocument/MissingField/InvalidValue."""
    return vnfd_from_dict(_load_document(text))


def vnfd_to_dict(vnfd: VnfDescriptor) -> dict:
    return {
        "id": vnfd.id,
        "name": vnfd.name,
        "image_ref": vnfd.image_ref,
        "flavor": {
            "name": vnfd.flavor.name,
            "vcpus": vnfd.flavor.vcpus,
            "memory_mb": vnfd.flavor.memory_mb,
            "storage_gb": vnfd.flavor.storage_gb,
        },
        "connection_points": list(vnfd.connection_points),
        "complexity_hint": vnfd.complexity_hint,
    }


def serialize_vnfd(vnfd: VnfDescriptor) -> str:
    return json.dumps(vnfd_to_dict(vnfd), indent=2, sort_keys=True)


def parse_nsd(text: str, known_vnfds: Iterable[VnfDescriptor]) -> NsDescriptor:
    """Parse an NSD and resolve every reference against known_vnfds.

    Raises UnresolvedReference for unknown vnfd ids or connection points and
    DuplicateGraphEntry for a repeated forwarding-graph member.
    """
    doc = _load_document(text)
    return nsd_from_dict(doc, known_vnfds)


def nsd_from_dict(doc: Mapping, known_vnfds: Iterable[VnfDescriptor]) -> NsDescriptor:
    by_id = {v.id: v for v in known_vnfds}

    constituents = _require(doc, "constituent_vnfds")
    if not isinstance(constituents, list):
        raise InvalidValue("constituent_vnfds", "expected list")
    for vnfd_id in constituents:
        if vnfd_id not in by_id:
            raise UnresolvedReference(str(vnfd_id))

    graph = doc.get("forwarding_graph", [])
    if not isinstance(graph, list):
        raise InvalidValue("forwarding_graph", "expected list")
    seen = set()
    for entry in graph:
        if entry in seen:
            raise DuplicateGraphEntry(str(entry))
        seen.add(entry)
        if entry not in constituents:
            raise UnresolvedReference(str(entry))

    links = []
    for i, link_doc in enumerate(doc.get("virtual_links", [])):
        if not isinstance(link_doc, Mapping):
            raise InvalidValue(f"virtual_links[{i}]", "expected object")
        name = _as_str(_require(link_doc, "name", f"virtual_links[{i}]."), "name")
        endpoints = _require(link_doc, "endpoints", f"virtual_links[{i}].")
        if not isinstance(endpoints, list):
            raise InvalidValue(f"virtual_links[{i}].endpoints", "expected list")
        for ep in endpoints:
            _resolve_endpoint(str(ep), constituents, by_id)
        links.append(VirtualLink(name=name, endpoints=tuple(str(e) for e in endpoints)))

    return NsDescriptor(
        id=_as_str(_require(doc, "id"), "id"),
        name=_as_str(_require(doc, "name"), "name"),
        constituent_vnfds=tuple(constituents),
        virtual_links=tuple(links),
        forwarding_graph=tuple(graph),
    )


def _resolve_endpoint(endpoint: str, constituents, by_id) -> None:
    # endpoint format: "<vnfd_id>.<connection_point>"; cp names contain no dots
    vnfd_id, sep, cp = endpoint.rpartition(".")
    if not sep or not vnfd_id:
        raise UnresolvedReference(endpoint)
    if vnfd_id not in constituents or vnfd_id not in by_id:
        raise UnresolvedReference(endpoint)
    if cp not in by_id[vnfd_id].connection_points:
        raise UnresolvedReference(endpoint)


def nsd_to_dict(nsd: NsDescriptor) -> dict:
    return {
        "id": nsd.id,
        "name": nsd.name,
        "constituent_vnfds": list(nsd.constituent_vnfds),
        "virtual_links": [
            {"name": link.name, "endpoints": list(link.endpoints)}
            for link in nsd.virtual_links
        ],
        "forwarding_graph": list(nsd.forwarding_graph),
    }


def serialize_nsd(nsd: NsDescriptor) -> str:
    return json.dumps(nsd_to_dict(nsd), indent=2, sort_keys=True)


def validate_package(pkg: VnfPackage) -> list[Violation]:
    """Check a package against its invariants; an empty list means valid."""
    violations = []
    if not isinstance(pkg.image_size_mb, (int, float)) or pkg.image_size_mb <= 0:
        violations.append(
            Violation("image_size_mb", f"must be > 0, got {pkg.image_size_mb!r}")
        )
    if pkg.image_format not in SUPPORTED_IMAGE_FORMATS:
        violations.append(
            Violation("image_format", f"unsupported format {pkg.image_format!r}")
        )
    if not pkg.image_name:
        violations.append(Violation("image_name", "must be non-empty"))
    return violations


def package_from_dict(doc: Mapping) -> VnfPackage:
    vnfd_doc = _require(doc, "vnfd")
    if not isinstance(vnfd_doc, Mapping):
        raise InvalidValue("vnfd", "expected object")
    fmt_name = doc.get("image_format", "QCOW2")
    try:
        fmt = ImageFormat(fmt_name)
    except ValueError:
        raise InvalidValue("image_format", f"unknown format {fmt_name!r}") from None
    size = doc.get("image_size_mb", _DEFAULT_IMAGE_SIZE_MB)
    if isinstance(size, bool) or not isinstance(size, (int, float)):
        raise InvalidValue("image_size_mb", f"expected number, got {size!r}")
    return VnfPackage(
        vnfd=vnfd_from_dict(vnfd_doc),
        image_name=_as_str(_require(doc, "image_name"), "image_name"),
        image_size_mb=size,
        image_format=fmt,
    )


def parse_package(text: str) -> VnfPackage:
    return package_from_dict(_load_document(text))


def package_to_dict(pkg: VnfPackage) -> dict:
    return {
        "vnfd": vnfd_to_dict(pkg.vnfd),
        "image_name": pkg.image_name,
        "image_size_mb": pkg.image_size_mb,
        "image_format": pkg.image_format.value,
    }


def serialize_package(pkg: VnfPackage) -> str:
    return json.dumps(package_to_dict(pkg), indent=2, sort_keys=True)


def builtin_vcpe() -> tuple[NsDescriptor, list[VnfPackage]]:
    """The built-in five-component residential-broadband vCPE fixture.

    Each component runs on an m1.medium flavor (2 vCPU / 4096 MB / 40 GB) and
    the forwarding graph chains them in the order of VCPE_COMPONENT_NAMES.
    Image size defaults to 1024 MB per package (a simulator default, freely
    overridable per campaign).
    """
    packages = []
    for name in VCPE_COMPONENT_NAMES:
        vnfd = VnfDescriptor(
            id=name,
            name=name,
            image_ref=f"{name.lower()}-image",
            flavor=ResourceFlavor(
                name="m1.medium", vcpus=2, memory_mb=4096, storage_gb=40
            ),
            connection_points=("eth0", "eth1"),
            complexity_hint=3 if name in _COMPLEX_COMPONENTS else 1,
        )
        packages.append(
            VnfPackage(
                vnfd=vnfd,
                image_name=f"{name.lower()}.qcow2",
                image_size_mb=_DEFAULT_IMAGE_SIZE_MB,
                image_format=ImageFormat.QCOW2,
            )
        )

    chain = VCPE_COMPONENT_NAMES
    links = tuple(
        VirtualLink(
            name=f"vl{i}",
            endpoints=(f"{chain[i]}.eth1", f"{chain[i + 1]}.eth0"),
        )
        for i in range(len(chain) - 1)
    )
    nsd = NsDescriptor(
        id="vcpe",
        name="Residential Broadband vCPE",
        constituent_vnfds=chain,
        virtual_links=links,
        forwarding_graph=chain,
    )
    return nsd, packages
