import json

import pytest
from hypothesis import given, strategies as st

from manobench.descriptors import (
    ImageFormat,
    NsDescriptor,
    ResourceFlavor,
    VnfDescriptor,
    VnfPackage,
    builtin_vcpe,
    nsd_from_dict,
    nsd_to_dict,
    package_from_dict,
    package_to_dict,
    parse_nsd,
    parse_vnfd,
    serialize_nsd,
    serialize_vnfd,
    validate_package,
)
from manobench.errors import (
    DuplicateGraphEntry,
    InvalidValue,
    MalformedDocument,
    MissingField,
    UnresolvedReference,
)

VBNG_DOC = json.dumps(
    {
        "id": "vBNG",
        "name": "vBNG",
        "image_ref": "vbng-image",
        "flavor": {"name": "m1.medium", "vcpus": 2, "memory_mb": 4096,
                   "storage_gb": 40},
        "connection_points": ["eth0", "eth1"],
        "complexity_hint": 3,
    }
)


class TestParseVnfd:
    def test_vbng_document(self):
        vnfd = parse_vnfd(VBNG_DOC)
        assert vnfd.name == "vBNG"
        assert vnfd.flavor.name == "m1.medium"
        assert vnfd.flavor.vcpus == 2
        assert vnfd.flavor.memory_mb == 4096
        assert vnfd.flavor.storage_gb == 40

    def test_zero_vcpus_rejected(self):
        doc = json.loads(VBNG_DOC)
        doc["flavor"]["vcpus"] = 0
        with pytest.raises(InvalidValue) as excinfo:
            parse_vnfd(json.dumps(doc))
        assert "vcpus" in str(excinfo.value)

    def test_minimal_document(self):
        doc = {
            "id": "tiny",
            "name": "tiny",
            "image_ref": "tiny-img",
            "flavor": {"name": "f", "vcpus": 1, "memory_mb": 1, "storage_gb": 0},
        }
        vnfd = parse_vnfd(json.dumps(doc))
        assert vnfd.connection_points == ()
        assert vnfd.complexity_hint == 1

    def test_missing_field_named(self):
        doc = json.loads(VBNG_DOC)
        del doc["image_ref"]
        with pytest.raises(MissingField) as excinfo:
            parse_vnfd(json.dumps(doc))
        assert excinfo.value.field == "image_ref"

    def test_missing_flavor_subfield(self):
        doc = json.loads(VBNG_DOC)
        del doc["flavor"]["memory_mb"]
        with pytest.raises(MissingField) as excinfo:
            parse_vnfd(json.dumps(doc))
        assert "memory_mb" in excinfo.value.field

    def test_malformed_json(self):
        with pytest.raises(MalformedDocument):
            parse_vnfd("{not json")

    def test_non_object_top_level(self):
        with pytest.raises(MalformedDocument):
            parse_vnfd("[1, 2]")

    def test_duplicate_connection_points(self):
        doc = json.loads(VBNG_DOC)
        doc["connection_points"] = ["eth0", "eth0"]
        with pytest.raises(InvalidValue):
            parse_vnfd(json.dumps(doc))

    def test_zero_complexity_hint(self):
        doc = json.loads(VBNG_DOC)
        doc["complexity_hint"] = 0
        with pytest.raises(InvalidValue):
            parse_vnfd(json.dumps(doc))


identifiers = st.text(
    alphabet=st.characters(whitelist_categories=("Ll", "Lu", "Nd")),
    min_size=1,
    max_size=8,
)


@st.composite
def flavors(draw):
    return ResourceFlavor(
        name=draw(identifiers),
        vcpus=draw(st.integers(1, 64)),
        memory_mb=draw(st.integers(1, 1 << 20)),
        storage_gb=draw(st.integers(0, 1 << 12)),
    )


@st.composite
def vnfds(draw):
    cps = draw(st.lists(identifiers, max_size=4, unique=True))
    return VnfDescriptor(
        id=draw(identifiers),
        name=draw(identifiers),
        image_ref=draw(identifiers),
        flavor=draw(flavors()),
        connection_points=tuple(cps),
        complexity_hint=draw(st.integers(1, 8)),
    )


class TestRoundTrip:
    @given(vnfds())
    def test_vnfd_round_trip(self, vnfd):
        assert parse_vnfd(serialize_vnfd(vnfd)) == vnfd

    @given(st.lists(vnfds(), min_size=1, max_size=5,
                    unique_by=lambda v: v.id))
    def test_nsd_round_trip(self, members):
        nsd = NsDescriptor(
            id="svc",
            name="svc",
            constituent_vnfds=tuple(v.id for v in members),
            forwarding_graph=tuple(v.id for v in members),
        )
        assert parse_nsd(serialize_nsd(nsd), members) == nsd


def _vcpe_vnfds():
    _, packages = builtin_vcpe()
    return [p.vnfd for p in packages]


class TestParseNsd:
    def test_vcpe_nsd(self):
        nsd, packages = builtin_vcpe()
        reparsed = parse_nsd(serialize_nsd(nsd), [p.vnfd for p in packages])
        assert len(reparsed.constituent_vnfds) == 5
        assert reparsed == nsd

    def test_unknown_reference(self):
        doc = {
            "id": "svc", "name": "svc",
            "constituent_vnfds": ["vFW"],
            "forwarding_graph": [],
        }
        with pytest.raises(UnresolvedReference) as excinfo:
            parse_nsd(json.dumps(doc), _vcpe_vnfds())
        assert excinfo.value.ref == "vFW"

    def test_empty_nsd_is_valid(self):
        doc = {"id": "svc", "name": "svc", "constituent_vnfds": [],
               "forwarding_graph": []}
        nsd = parse_nsd(json.dumps(doc), [])
        assert nsd.constituent_vnfds == ()
        assert nsd.forwarding_graph == ()

    def test_duplicate_graph_entry(self):
        doc = {
            "id": "svc", "name": "svc",
            "constituent_vnfds": ["vBNG"],
            "forwarding_graph": ["vBNG", "vBNG"],
        }
        with pytest.raises(DuplicateGraphEntry):
            parse_nsd(json.dumps(doc), _vcpe_vnfds())

    def test_unresolved_connection_point(self):
        doc = {
            "id": "svc", "name": "svc",
            "constituent_vnfds": ["vBNG"],
            "virtual_links": [
                {"name": "vl0", "endpoints": ["vBNG.eth9"]}
            ],
            "forwarding_graph": ["vBNG"],
        }
        with pytest.raises(UnresolvedReference) as excinfo:
            parse_nsd(json.dumps(doc), _vcpe_vnfds())
        assert "vBNG.eth9" in str(excinfo.value)

    @given(
        members=st.lists(vnfds(), min_size=1, max_size=4,
                         unique_by=lambda v: v.id),
        stranger=identifiers,
    )
    def test_graph_outside_constituents_rejected(self, members, stranger):
        ids = [v.id for v in members]
        if stranger in ids:
            return
        doc = {
            "id": "svc", "name": "svc",
            "constituent_vnfds": ids,
            "forwarding_graph": ids + [stranger],
        }
        with pytest.raises(UnresolvedReference):
            nsd_from_dict(doc, members)


class TestBuiltinVcpe:
    def test_component_set_and_flavors(self):
        nsd, packages = builtin_vcpe()
        names = [p.vnfd.name for p in packages]
        assert names == ["vBNG", "vGDHCP", "vBRG", "vGMUX", "vInfra"]
        for pkg in packages:
            assert pkg.vnfd.flavor.vcpus == 2
            assert pkg.vnfd.flavor.memory_mb == 4096
            assert pkg.vnfd.flavor.storage_gb == 40
            assert pkg.vnfd.flavor.name == "m1.medium"
            assert pkg.image_size_mb == 1024

    def test_aggregate_demand(self):
        # row-wise sums over the fixture table: 5 * (2, 4096, 40)
        _, packages = builtin_vcpe()
        assert sum(p.vnfd.flavor.vcpus for p in packages) == 10
        assert sum(p.vnfd.flavor.memory_mb for p in packages) == 20480
        assert sum(p.vnfd.flavor.storage_gb for p in packages) == 200

    def test_forwarding_graph_order(self):
        nsd, _ = builtin_vcpe()
        assert nsd.forwarding_graph == ("vBNG", "vGDHCP", "vBRG", "vGMUX", "vInfra")

    def test_complexity_hints(self):
        _, packages = builtin_vcpe()
        hints = {p.vnfd.name: p.vnfd.complexity_hint for p in packages}
        assert hints["vInfra"] == 3
        assert hints["vBNG"] == 3
        assert hints["vGDHCP"] == hints["vBRG"] == hints["vGMUX"] == 1

    def test_fixture_passes_validation(self):
        nsd, packages = builtin_vcpe()
        for pkg in packages:
            assert validate_package(pkg) == []
        # reparse through the public path to exercise reference resolution
        parse_nsd(serialize_nsd(nsd), [p.vnfd for p in packages])


class TestValidatePackage:
    def test_valid_package(self):
        _, packages = builtin_vcpe()
        assert validate_package(packages[0]) == []

    def test_zero_image_size(self):
        _, packages = builtin_vcpe()
        pkg = VnfPackage(vnfd=packages[0].vnfd, image_name="img",
                         image_size_mb=0)
        violations = validate_package(pkg)
        assert len(violations) == 1
        assert violations[0].code == "image_size_mb"

    def test_raw_format_supported(self):
        _, packages = builtin_vcpe()
        pkg = VnfPackage(vnfd=packages[0].vnfd, image_name="img",
                         image_format=ImageFormat.RAW)
        assert validate_package(pkg) == []

    def test_package_round_trip(self):
        _, packages = builtin_vcpe()
        for pkg in packages:
            assert package_from_dict(package_to_dict(pkg)) == pkg
