"""Repository metadata viability score with dataset-level saturation.

Popularity counters are squashed through a log transform that saturates at
the dataset's 95th percentile, so rank information above it is discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from malta.model import MaltaConfig, RepoMetadata


@dataclass(frozen=True)
class SaturationConstants:
    """Per-dimension 95th-percentile caps, computed once per dataset run."""

    k_stars: float
    k_forks: float
    k_watchers: float
    k_open_issues: float

    def __post_init__(self):
        for name in ("k_stars", "k_forks", "k_watchers", "k_open_issues"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return {
            "k_stars": self.k_stars,
            "k_forks": self.k_forks,
            "k_watchers": self.k_watchers,
            "k_open_issues": self.k_open_issues,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SaturationConstants":
        return cls(
            k_stars=data["k_stars"],
            k_forks=data["k_forks"],
            k_watchers=data["k_watchers"],
            k_open_issues=data["k_open_issues"],
        )


def saturation_constants(dataset: Sequence[RepoMetadata]) -> SaturationConstants:
    """Empirical 95th percentiles (linear interpolation between ranks)."""
    if not dataset:
        raise ValueError("cannot compute saturation constants over an empty dataset")

    def q95(values: list[int]) -> float:
        return float(np.quantile(np.asarray(values, dtype=np.float64), 0.95))

    return SaturationConstants(
        k_stars=q95([m.stars for m in dataset]),
        k_forks=q95([m.forks for m in dataset]),
        k_watchers=q95([m.watchers for m in dataset]),
        k_open_issues=q95([m.open_issues for m in dataset]),
    )


def log_saturate(x: float, k: float) -> float:
    """min(1, log(1+x) / log(1+k)), saturating at the cap.

    Degenerate cap k=0: 0 for x=0 and 1 for x>0, since a dimension that is
    zero dataset-wide carries no rank information.
    """
    if x < 0 or k < 0:
        raise ValueError("log_saturate arguments must be >= 0")
    if k == 0:
        return 0.0 if x == 0 else 1.0
    return min(1.0, math.log1p(x) / math.log1p(k))


def compute_rmvs(
    meta: RepoMetadata, constants: SaturationConstants, cfg: MaltaConfig
) -> float:
    """Metadata viability: archival penalty times beta-weighted components.

    Open issues enter as a backlog penalty (1 - saturated value). With
    apply_archival_penalty off, the archived flag has no effect on the
    result (the score variant used for archival-ablated validation).
    """
    s_star = log_saturate(meta.stars, constants.k_stars)
    f_star = log_saturate(meta.forks, constants.k_forks)
    w_star = log_saturate(meta.watchers, constants.k_watchers)
    i_pen = 1.0 - log_saturate(meta.open_issues, constants.k_open_issues)

    if cfg.apply_archival_penalty:
        a_pen = 1.0 - cfg.alpha * (1.0 if meta.archived else 0.0)
    else:
        a_pen = 1.0

    weighted = (
        cfg.beta_stars * s_star
        + cfg.beta_forks * f_star
        + cfg.beta_watchers * w_star
        + cfg.beta_issues * i_pen
    )
    return a_pen * weighted
