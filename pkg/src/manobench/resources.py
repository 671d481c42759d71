"""Flavor-shaped resource vectors used for capacities, demands, and residuals."""

from __future__ import annotations

from dataclasses import dataclass

from .descriptors import ResourceFlavor


@dataclass(frozen=True)
class Resources:
    """A (vcpus, memory_mb, storage_gb) vector with element-wise arithmetic."""

    DIMENSIONS = ("vcpus", "memory_mb", "storage_gb")

    vcpus: int
    memory_mb: int
    storage_gb: int

    @classmethod
    def of_flavor(cls, flavor: ResourceFlavor) -> "Resources":
        return cls(flavor.vcpus, flavor.memory_mb, flavor.storage_gb)

    @classmethod
    def zero(cls) -> "Resources":
        return cls(0, 0, 0)

    def __add__(self, other: "Resources") -> "Resources":
        return Resources(
            self.vcpus + other.vcpus,
            self.memory_mb + other.memory_mb,
            self.storage_gb + other.storage_gb,
        )

    def __sub__(self, other: "Resources") -> "Resources":
        return Resources(
            self.vcpus - other.vcpus,
            self.memory_mb - other.memory_mb,
            self.storage_gb - other.storage_gb,
        )

    def fits_within(self, other: "Resources") -> bool:
        return (
            self.vcpus <= other.vcpus
            and self.memory_mb <= other.memory_mb
            and self.storage_gb <= other.storage_gb
        )

    def all_positive(self) -> bool:
        return self.vcpus > 0 and self.memory_mb > 0 and self.storage_gb > 0

    def any_negative(self) -> bool:
        return self.vcpus < 0 or self.memory_mb < 0 or self.storage_gb < 0

    def as_dict(self) -> dict:
        return {
            "vcpus": self.vcpus,
            "memory_mb": self.memory_mb,
            "storage_gb": self.storage_gb,
        }

    @classmethod
    def from_dict(cls, doc) -> "Resources":
        return cls(
            vcpus=doc["vcpus"],
            memory_mb=doc["memory_mb"],
            storage_gb=doc["storage_gb"],
        )
