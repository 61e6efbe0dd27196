"""Final score aggregation and per-package orchestration."""

from __future__ import annotations

from malta.activity import CommitFilterRules, compute_das
from malta.metadata import SaturationConstants, compute_rmvs
from malta.model import (
    ComponentScores,
    MaltaConfig,
    MaltaResult,
    ObservationWindows,
    PackageSnapshot,
    classify_maintenance_level,
    classify_malta_risk,
)
from malta.responsiveness import compute_mrs, partition_prs


class PackageScoringError(Exception):
    """Component failure with the offending package's name attached."""

    def __init__(self, package: str, cause: Exception):
        super().__init__(f"failed to score package {package!r}: {cause}")
        self.package = package
        self.cause = cause


def compute_final(
    components: ComponentScores, archived: bool, cfg: MaltaConfig
) -> MaltaResult:
    """Weighted aggregate of the component scores.

    Undefined responsiveness is renormalized away over the observed
    signals, except for archived repositories, where it is pinned to 0
    before the full-weight formula (the override takes precedence).
    """
    s_dev, s_resp, s_meta = components.s_dev, components.s_resp, components.s_meta
    if s_resp is None and archived:
        s_resp = 0.0

    if s_resp is not None:
        s_final = cfg.w_dev * s_dev + cfg.w_resp * s_resp + cfg.w_meta * s_meta
    else:
        observed_weight = cfg.w_dev + cfg.w_meta
        if observed_weight <= 0:
            raise ValueError(
                "cannot renormalize: w_dev + w_meta is 0 and responsiveness is undefined"
            )
        s_final = (cfg.w_dev * s_dev + cfg.w_meta * s_meta) / observed_weight

    s_final = min(1.0, max(0.0, s_final))
    s_final_100 = 100.0 * s_final
    return MaltaResult(
        s_final=s_final,
        s_final_100=s_final_100,
        maintenance_level=classify_maintenance_level(s_final_100),
        risk_level=classify_malta_risk(s_final, cfg),
        components=components,
    )


def score_package(
    snapshot: PackageSnapshot,
    windows: ObservationWindows,
    constants: SaturationConstants,
    cfg: MaltaConfig,
    rules: CommitFilterRules,
) -> MaltaResult:
    """Run all three component scores and aggregate them.

    Deterministic for fixed inputs; component errors are re-raised with the
    package name attached.
    """
    try:
        das = compute_das(snapshot, windows, cfg, rules)
        partition = partition_prs(snapshot.pull_requests, windows)
        mrs = compute_mrs(partition, windows, cfg)
        s_meta = compute_rmvs(snapshot.metadata, constants, cfg)
        components = ComponentScores(
            s_dev=das.s_dev,
            s_meta=s_meta,
            s_resp=None if mrs is None else mrs.s_resp,
            d_c=das.d_c,
            r_c=das.r_c,
            r_dec=None if mrs is None else mrs.r_dec,
            d_dec=None if mrs is None else mrs.d_dec,
            p_stale=None if mrs is None else mrs.p_stale,
            t_last_days=das.t_last_days,
        )
        return compute_final(components, snapshot.metadata.archived, cfg)
    except PackageScoringError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise PackageScoringError(snapshot.name, exc) from exc
