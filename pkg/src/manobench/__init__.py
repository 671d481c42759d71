"""manobench: benchmark NFV MANO targets on lifecycle and decision KPIs.

Ships a deterministic simulated MANO+NFVI target speaking the same wire
protocol as the generic HTTP client, so every measurement path can be
verified at desk scale.
"""

from .capability import (
    CapabilityManifest,
    ComparisonMatrix,
    FeatureStatus,
    Footprint,
    VimPlatform,
    compare_capabilities,
    footprint_ratio,
)
from .descriptors import (
    ImageFormat,
    NsDescriptor,
    ResourceFlavor,
    VnfDescriptor,
    VnfPackage,
    builtin_vcpe,
    parse_nsd,
    parse_vnfd,
    serialize_nsd,
    serialize_vnfd,
    validate_package,
)
from .drivers import (
    EndpointConfig,
    Measure,
    NbiClient,
    SimDriver,
    TargetDriver,
    collect_metrics,
    nbi_client,
    sim_driver,
)
from .kpi import (
    AggregateMode,
    AggregateStats,
    KpiKind,
    KpiSample,
    QodInputs,
    QodScore,
    aggregate,
    dpd,
    opd,
    qod_score,
    rod,
)
from .lifecycle import (
    ActionKind,
    LifecycleEvent,
    LifecyclePhase,
    LifecycleTimeline,
)
from .nbi_server import NbiServer, nbi_serve
from .nfvi import (
    ComputeNode,
    DelayModel,
    MetricModel,
    MetricName,
    MetricSample,
    PlacementPolicy,
    VimState,
    VirtualClock,
    VmInstance,
    VmState,
    create_pool,
)
from .orchestrator import (
    DecisionTrace,
    NsInstance,
    OrchestratorConfig,
    SimOrchestrator,
)
from .resources import Resources

__version__ = "0.1.0"
