"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from ManobenchError so callers (and the
CLI) can distinguish toolkit failures from genuine bugs.
"""

from __future__ import annotations


class ManobenchError(Exception):
    """Base class for all toolkit errors."""


# --- descriptor documents ---------------------------------------------------

class MalformedDocument(ManobenchError):
    """Input is not a well-formed descriptor document (syntax level)."""


class MissingField(ManobenchError):
    def __init__(self, field: str):
        super().__init__(f"missing required field: {field}")
        self.field = field


class InvalidValue(ManobenchError):
    def __init__(self, field: str, reason: str = ""):
        msg = f"invalid value for {field}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)
        self.field = field


class UnresolvedReference(ManobenchError):
    def __init__(self, ref: str):
        super().__init__(f"unresolved reference: {ref}")
        self.ref = ref


class DuplicateGraphEntry(ManobenchError):
    def __init__(self, entry: str):
        super().__init__(f"duplicate forwarding-graph entry: {entry}")
        self.entry = entry


# --- lifecycle timelines and KPI extraction ---------------------------------

class PhaseOrderViolation(ManobenchError):
    def __init__(self, instance_id: str, detail: str):
        super().__init__(f"phase order violation for {instance_id}: {detail}")
        self.instance_id = instance_id


class MissingPhase(ManobenchError):
    def __init__(self, instance_id: str, phase: str):
        super().__init__(f"no {phase} event recorded for {instance_id}")
        self.instance_id = instance_id
        self.phase = phase


class UnknownAction(ManobenchError):
    def __init__(self, action_id: str):
        super().__init__(f"unknown action id: {action_id}")
        self.action_id = action_id


class ClockDomainMismatch(ManobenchError):
    """Timestamps from different clock domains may not be combined."""


class InvalidWeights(ManobenchError):
    """Decision-score weights must be five non-negatives summing to one."""


class EmptySampleSet(ManobenchError):
    """Aggregation requires at least one sample."""


class MixedKinds(ManobenchError):
    """Aggregation requires samples of a single KPI kind."""


class DivisionByZeroDimension(ManobenchError):
    def __init__(self, dimension: str):
        super().__init__(f"denominator footprint has zero {dimension}")
        self.dimension = dimension


# --- simulated infrastructure ------------------------------------------------

class InvalidCapacity(ManobenchError):
    """Compute-node capacities must be strictly positive in every dimension."""


class NoFeasibleNode(ManobenchError):
    """No compute node can admit the requested demand."""


class AdmissionViolation(ManobenchError):
    """Allocation would exceed a node's capacity in some dimension."""


class DuplicateInstance(ManobenchError):
    def __init__(self, instance_id: str):
        super().__init__(f"instance already allocated: {instance_id}")
        self.instance_id = instance_id


class NoAllocation(ManobenchError):
    def __init__(self, instance_id: str):
        super().__init__(f"no allocation recorded for instance: {instance_id}")
        self.instance_id = instance_id


class WrongState(ManobenchError):
    def __init__(self, detail: str):
        super().__init__(detail)


# --- simulated orchestrator ---------------------------------------------------

class ValidationFailed(ManobenchError):
    def __init__(self, violations):
        super().__init__(
            "package validation failed: "
            + "; ".join(str(v) for v in violations)
        )
        self.violations = list(violations)


class MissingPackage(ManobenchError):
    def __init__(self, vnfd_id: str):
        super().__init__(f"no onboarded package for descriptor: {vnfd_id}")
        self.vnfd_id = vnfd_id


class UnknownNs(ManobenchError):
    def __init__(self, ns_id: str):
        super().__init__(f"unknown network-service instance: {ns_id}")
        self.ns_id = ns_id


class UnknownVnf(ManobenchError):
    def __init__(self, vnf_name: str):
        super().__init__(f"not a constituent of this service: {vnf_name}")
        self.vnf_name = vnf_name


# --- drivers / wire protocol ---------------------------------------------------

class BindFailure(ManobenchError):
    """Server could not bind the requested port."""


class Timeout(ManobenchError):
    """Endpoint did not answer (or reach the awaited state) in time."""


class ProtocolError(ManobenchError):
    """Endpoint returned a body that does not conform to the wire protocol."""


class HttpError(ManobenchError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}" + (f": {detail}" if detail else ""))
        self.status = status


# --- reports -------------------------------------------------------------------

class UnreadableReport(ManobenchError):
    """Report file is missing, unparseable, or structurally wrong."""


class SchemaVersionMismatch(ManobenchError):
    def __init__(self, found):
        super().__init__(f"unsupported report_version: {found!r}")
        self.found = found
