"""Maintenance-aware technical lag scoring for software packages.

Scores a package's likelihood of sustained maintenance from three signals
(development activity, maintainer responsiveness, repository metadata
viability), classifies maintenance risk, and ships the evaluation
machinery (AUC, cross-tabulation statistics, parameter sweeps) to study
those scores against version-lag measures.
"""

from malta.activity import (
    CommitFilterRules,
    DEFAULT_DOC_GLOBS,
    DasResult,
    compute_das,
    count_nontrivial,
    is_nontrivial,
    recency,
    velocity_decay,
)
from malta.aggregation import PackageScoringError, compute_final, score_package
from malta.metadata import (
    SaturationConstants,
    compute_rmvs,
    log_saturate,
    saturation_constants,
)
from malta.model import (
    CommitRecord,
    ComponentScores,
    MaintenanceLevel,
    MaltaConfig,
    MaltaResult,
    ObservationWindows,
    PackageSnapshot,
    PullRequestRecord,
    PvacLabel,
    RepoMetadata,
    RiskLevel,
    classify_maintenance_level,
    classify_malta_risk,
)
from malta.responsiveness import MrsResult, PrPartition, compute_mrs, partition_prs

__version__ = "0.1.0"

__all__ = [
    "CommitFilterRules",
    "CommitRecord",
    "ComponentScores",
    "DEFAULT_DOC_GLOBS",
    "DasResult",
    "MaintenanceLevel",
    "MaltaConfig",
    "MaltaResult",
    "MrsResult",
    "ObservationWindows",
    "PackageScoringError",
    "PackageSnapshot",
    "PrPartition",
    "PullRequestRecord",
    "PvacLabel",
    "RepoMetadata",
    "RiskLevel",
    "SaturationConstants",
    "classify_maintenance_level",
    "classify_malta_risk",
    "compute_das",
    "compute_final",
    "compute_mrs",
    "compute_rmvs",
    "count_nontrivial",
    "is_nontrivial",
    "log_saturate",
    "partition_prs",
    "recency",
    "saturation_constants",
    "score_package",
    "velocity_decay",
    "__version__",
]
