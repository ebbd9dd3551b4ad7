"""Two-sided fair recommendation via fair allocation of indivisible goods.

Customers receive EF1 (envy-free up to one item) recommendation sets of
size ``k`` and producers receive a maximin-share level of exposure.
"""

from fairrec.allocator import (
    AllocatorState,
    FairRecTrace,
    PhaseTrace,
    Termination,
    exposure_guarantee,
    fairrec,
    greedy_round_robin,
    producer_mms_threshold,
)
from fairrec.audit import AuditResult, audit_run, brute_force_mms, check_ef1, envy_matrix
from fairrec.baselines import mixed_k, poorest_k, random_k, top_k
from fairrec.metrics import (
    FairnessReport,
    evaluate,
    lorenz_series,
    metric_H,
    metric_L,
    metric_Y,
    metric_Z,
    utility_cdf_series,
    utility_stats,
)
from fairrec.model import (
    Allocation,
    FairRecError,
    Instance,
    RunConfig,
    TieBreak,
    exposure_of,
    utility_of,
    validate_instance,
)

__all__ = [
    "Allocation",
    "AllocatorState",
    "AuditResult",
    "FairRecError",
    "FairRecTrace",
    "FairnessReport",
    "Instance",
    "PhaseTrace",
    "RunConfig",
    "Termination",
    "TieBreak",
    "audit_run",
    "brute_force_mms",
    "check_ef1",
    "envy_matrix",
    "evaluate",
    "exposure_guarantee",
    "exposure_of",
    "fairrec",
    "greedy_round_robin",
    "lorenz_series",
    "metric_H",
    "metric_L",
    "metric_Y",
    "metric_Z",
    "mixed_k",
    "poorest_k",
    "producer_mms_threshold",
    "random_k",
    "top_k",
    "utility_cdf_series",
    "utility_of",
    "utility_stats",
    "validate_instance",
]

__version__ = "0.1.0"
