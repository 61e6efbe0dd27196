"""Parameter-grid sweeps: classification performance and label stability.

The shipped grid spans six dimensions (component weights, DAS decay, MRS
timeliness, RMVS parameters, MALTA risk thresholds, version-lag
thresholds). Rows in the version-lag dimension evaluate the version-number
delta signal and its risk labels; every other row evaluates the MALTA
score under the modified configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from malta.activity import CommitFilterRules
from malta.aggregation import score_package
from malta.evaluation import LabeledScore, auc_roc, classify_vl_risk
from malta.metadata import SaturationConstants, saturation_constants
from malta.model import (
    MaltaConfig,
    MaltaResult,
    ObservationWindows,
    PackageSnapshot,
    PvacLabel,
    RiskLevel,
)

VL_DIMENSION = "Version Lag Thresholds"

ACTIVE_LABELS = frozenset({PvacLabel.VERY_ACTIVE, PvacLabel.MODERATELY_ACTIVE})


class GridConfigError(Exception):
    """A grid entry whose overrides violate the config invariants."""

    def __init__(self, name: str, cause: Exception):
        super().__init__(f"configuration {name!r} rejected: {cause}")
        self.name = name


@dataclass(frozen=True)
class GridEntry:
    name: str
    dimension: str
    overrides: dict

    def build(self, base: MaltaConfig) -> MaltaConfig:
        try:
            return base.replace(**self.overrides)
        except (TypeError, ValueError) as exc:
            raise GridConfigError(self.name, exc) from exc


@dataclass(frozen=True)
class SweepRow:
    """One grid configuration's metrics, mirroring the sweep CSV columns."""

    dimension: str
    name: str
    auc_active: float | None
    auc_archived: float | None
    pct_low: float
    pct_high: float
    agreement: float


def load_grid(path: Path | str | None = None) -> list[GridEntry]:
    """Read a grid file; None loads the shipped 22-row default grid."""
    if path is None:
        text = (
            resources.files("malta")
            .joinpath("data/sensitivity_grid.json")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    if not isinstance(raw, list) or not raw:
        raise ValueError("grid file must be a non-empty JSON list")
    entries = []
    for item in raw:
        entries.append(
            GridEntry(
                name=str(item["name"]),
                dimension=str(item["dimension"]),
                overrides=dict(item.get("overrides", {})),
            )
        )
    return entries


def _auc_or_none(scored: list[tuple[float, bool]]) -> float | None:
    labels = {label for _, label in scored}
    if len(labels) < 2:
        return None
    return auc_roc([LabeledScore("", score, label) for score, label in scored])


def _classification_aucs(
    dataset: Sequence[PackageSnapshot], scores: Sequence[float]
) -> tuple[float | None, float | None]:
    active_task = [
        (score, snap.pvac_label in ACTIVE_LABELS)
        for snap, score in zip(dataset, scores)
        if snap.pvac_label is not None
    ]
    archived_task = [
        (score, snap.metadata.archived) for snap, score in zip(dataset, scores)
    ]
    return _auc_or_none(active_task), _auc_or_none(archived_task)


def _label_shares(labels: Sequence[RiskLevel]) -> tuple[float, float]:
    if not labels:
        return 0.0, 0.0
    n = len(labels)
    low = 100.0 * sum(1 for lab in labels if lab is RiskLevel.LOW) / n
    high = 100.0 * sum(1 for lab in labels if lab is RiskLevel.HIGH) / n
    return low, high


def _agreement(labels: Sequence[RiskLevel], reference: Sequence[RiskLevel]) -> float:
    if len(labels) != len(reference):
        raise ValueError("label vectors must have equal length")
    if not labels:
        return 100.0
    matches = sum(1 for a, b in zip(labels, reference) if a is b)
    return 100.0 * matches / len(labels)


def run_config(
    dataset: Sequence[PackageSnapshot],
    cfg: MaltaConfig,
    windows: ObservationWindows,
    rules: CommitFilterRules,
    constants: SaturationConstants | None = None,
) -> list[MaltaResult]:
    """Score the whole dataset under one configuration.

    Saturation constants do not depend on any config parameter, so callers
    sweeping many configurations compute them once and pass them in.
    """
    if constants is None:
        constants = saturation_constants([s.metadata for s in dataset])
    return [score_package(snap, windows, constants, cfg, rules) for snap in dataset]


def sweep(
    dataset: Sequence[PackageSnapshot],
    grid: Sequence[GridEntry],
    default: MaltaConfig,
    windows: ObservationWindows,
    rules: CommitFilterRules,
) -> list[SweepRow]:
    """Run every grid configuration and measure agreement with the default.

    Agreement is the percentage of packages whose risk label matches the
    default run's label (over all packages; for version-lag rows, over the
    packages carrying a vnd value).
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    constants = saturation_constants([s.metadata for s in dataset])

    default_results = run_config(dataset, default, windows, rules, constants)
    default_malta_labels = [r.risk_level for r in default_results]

    vl_packages = [s for s in dataset if s.vnd is not None]
    default_vl_labels = [classify_vl_risk(s.vnd, default) for s in vl_packages]

    rows: list[SweepRow] = []
    for entry in grid:
        cfg = entry.build(default)
        if entry.dimension == VL_DIMENSION:
            labels = [classify_vl_risk(s.vnd, cfg) for s in vl_packages]
            auc_active, auc_archived = _classification_aucs(
                vl_packages, [s.vnd for s in vl_packages]
            )
            agreement = _agreement(labels, default_vl_labels)
        else:
            results = run_config(dataset, cfg, windows, rules, constants)
            labels = [r.risk_level for r in results]
            auc_active, auc_archived = _classification_aucs(
                dataset, [r.s_final for r in results]
            )
            agreement = _agreement(labels, default_malta_labels)
        pct_low, pct_high = _label_shares(labels)
        rows.append(
            SweepRow(
                dimension=entry.dimension,
                name=entry.name,
                auc_active=auc_active,
                auc_archived=auc_archived,
                pct_low=pct_low,
                pct_high=pct_high,
                agreement=agreement,
            )
        )
    return rows
