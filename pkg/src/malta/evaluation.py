"""Analysis machinery: time lag, AUC, cross-tabulation, and effect sizes.

All rank statistics are computed from scratch (tie-aware rank sums); the
test suite pins them against brute-force pairwise enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import chi2 as chi2_dist

from malta import _kernels
from malta.activity import CommitFilterRules, _event_arrays
from malta.model import (
    MaltaConfig,
    PackageSnapshot,
    RiskLevel,
    SECONDS_PER_DAY,
    ensure_utc,
)

RISK_ORDER = (RiskLevel.LOW, RiskLevel.MEDIUM, RiskLevel.HIGH)


class LabeledScore(NamedTuple):
    """One package's score with a binary ground-truth label."""

    package: str
    score: float
    label: bool


def time_lag(
    snapshot: PackageSnapshot,
    reference: datetime,
    cfg: MaltaConfig,
    rules: CommitFilterRules,
) -> float:
    """Days from the reference date back to the last non-trivial commit.

    Capped at cfg.time_lag_cap_days; packages with no usable commit
    history get the cap itself (absent history as extreme staleness).
    """
    reference = ensure_utc(reference, "reference")
    times, flags = _event_arrays(snapshot.commits, rules)
    last = _kernels.latest_flagged_at_or_before(times, flags, reference.timestamp())
    if math.isnan(last):
        return float(cfg.time_lag_cap_days)
    days = (reference.timestamp() - last) / SECONDS_PER_DAY
    return min(days, float(cfg.time_lag_cap_days))


def classify_vl_risk(vnd: float, cfg: MaltaConfig) -> RiskLevel:
    """Version-lag risk from the version-number delta."""
    if vnd is None or math.isnan(vnd) or vnd < 0:
        raise ValueError(f"vnd must be a non-negative number, got {vnd!r}")
    if vnd < cfg.vl_low_threshold:
        return RiskLevel.LOW
    if vnd < cfg.vl_high_threshold:
        return RiskLevel.MEDIUM
    return RiskLevel.HIGH


def _score_label_arrays(data: Sequence[LabeledScore]) -> tuple[np.ndarray, np.ndarray]:
    scores = np.fromiter((d.score for d in data), dtype=np.float64, count=len(data))
    labels = np.fromiter((d.label for d in data), dtype=np.uint8, count=len(data))
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    return scores, labels


def auc_roc(data: Sequence[LabeledScore]) -> float:
    """Rank-based AUC: P(random positive outscores random negative).

    Ties count one half; requires at least one label of each class.
    """
    scores, labels = _score_label_arrays(data)
    return _kernels.rank_auc(scores, labels)


def roc_points(data: Sequence[LabeledScore]) -> list[tuple[float, float]]:
    """Monotone (fpr, tpr) staircase from (0, 0) to (1, 1).

    One point per distinct score threshold; tied scores produce diagonal
    segments, so the trapezoid area equals the rank AUC.
    """
    scores, labels = _score_label_arrays(data)
    n_pos = int(np.count_nonzero(labels))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    distinct_ends = np.flatnonzero(
        np.concatenate((sorted_scores[1:] != sorted_scores[:-1], [True]))
    )
    tp_cum = np.cumsum(sorted_labels)[distinct_ends]
    fp_cum = (distinct_ends + 1) - tp_cum
    points = [(0.0, 0.0)]
    points.extend((fp / n_neg, tp / n_pos) for fp, tp in zip(fp_cum, tp_cum))
    return points


def trapezoid_area(points: Sequence[tuple[float, float]]) -> float:
    """Area under an (x, y) polyline via the trapezoid rule."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


@dataclass(frozen=True)
class CrossTab:
    """3x3 contingency counts: rows VL risk, columns MALTA risk."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise ValueError("cross-tabulation must be 3x3")
        if any(c < 0 for row in self.counts for c in row):
            raise ValueError("cell counts must be >= 0")
        object.__setattr__(self, "counts", tuple(tuple(row) for row in self.counts))

    @property
    def row_totals(self) -> tuple[int, int, int]:
        return tuple(sum(row) for row in self.counts)

    @property
    def col_totals(self) -> tuple[int, int, int]:
        return tuple(sum(col) for col in zip(*self.counts))

    @property
    def total(self) -> int:
        return sum(self.row_totals)

    @property
    def row_percentages(self) -> tuple[tuple[float, float, float], ...]:
        out = []
        for row, total in zip(self.counts, self.row_totals):
            if total == 0:
                out.append((0.0, 0.0, 0.0))
            else:
                out.append(tuple(100.0 * c / total for c in row))
        return tuple(out)


def cross_tabulate(pairs: Sequence[tuple[RiskLevel, RiskLevel]]) -> CrossTab:
    """Count (VL risk, MALTA risk) pairs into the 3x3 table."""
    index = {level: i for i, level in enumerate(RISK_ORDER)}
    counts = [[0, 0, 0] for _ in range(3)]
    for vl_risk, malta_risk in pairs:
        counts[index[vl_risk]][index[malta_risk]] += 1
    return CrossTab(counts=tuple(tuple(row) for row in counts))


class ChiSquareResult(NamedTuple):
    chi2: float
    df: int
    p_value: float
    cramers_v: float
    dropped_rows: tuple[int, ...]
    dropped_cols: tuple[int, ...]


def cramers_v(chi2: float, n: int, n_rows: int, n_cols: int) -> float:
    """Cramer's V = sqrt(chi2 / (n * min(r - 1, c - 1)))."""
    if n <= 0:
        raise ValueError("n must be > 0")
    return math.sqrt(chi2 / (n * min(n_rows - 1, n_cols - 1)))


def chi_square_from_counts(counts: Sequence[Sequence[int]]) -> ChiSquareResult:
    """Pearson chi-square with Cramer's V over an r x c count matrix.

    All-zero rows or columns are collapsed away (reported in the result)
    and df adjusted accordingly.
    """
    table = np.asarray(counts, dtype=np.float64)
    if table.ndim != 2 or (table < 0).any():
        raise ValueError("counts must be a 2-d matrix of non-negative values")
    row_keep = table.sum(axis=1) > 0
    col_keep = table.sum(axis=0) > 0
    dropped_rows = tuple(int(i) for i in np.flatnonzero(~row_keep))
    dropped_cols = tuple(int(i) for i in np.flatnonzero(~col_keep))
    table = table[row_keep][:, col_keep]
    n_rows, n_cols = table.shape
    if n_rows < 2 or n_cols < 2:
        raise ValueError("need at least 2 non-empty rows and columns")

    n = table.sum()
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    chi2 = float(((table - expected) ** 2 / expected).sum())
    df = (n_rows - 1) * (n_cols - 1)
    return ChiSquareResult(
        chi2=chi2,
        df=df,
        p_value=float(chi2_dist.sf(chi2, df)),
        cramers_v=cramers_v(chi2, int(n), n_rows, n_cols),
        dropped_rows=dropped_rows,
        dropped_cols=dropped_cols,
    )


def chi_square_cramers_v(table: CrossTab) -> ChiSquareResult:
    """Association test between the VL and MALTA risk classifications."""
    return chi_square_from_counts(table.counts)


class MannWhitneyResult(NamedTuple):
    u_statistic: float
    p_value: float
    cliffs_delta: float
    magnitude: str


def _delta_magnitude(delta: float) -> str:
    size = abs(delta)
    if size < 0.147:
        return "negligible"
    if size < 0.33:
        return "small"
    if size < 0.474:
        return "medium"
    return "large"


def mann_whitney_cliffs_delta(
    a: Sequence[float], b: Sequence[float]
) -> MannWhitneyResult:
    """Mann-Whitney U for sample a plus Cliff's delta effect size.

    U uses average ranks for ties (so delta == 2U / (|a||b|) - 1); the
    p-value is the two-sided normal approximation with tie correction.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    u, tie_sum = _kernels.mann_whitney_u(x, y)
    delta = _kernels.cliffs_delta(x, y)

    n1, n2 = x.size, y.size
    n = n1 + n2
    mean_u = n1 * n2 / 2.0
    variance = n1 * n2 / 12.0 * ((n + 1) - tie_sum / (n * (n - 1)))
    if variance <= 0:
        p_value = 1.0
    else:
        z = (u - mean_u) / math.sqrt(variance)
        p_value = math.erfc(abs(z) / math.sqrt(2.0))
    return MannWhitneyResult(
        u_statistic=u,
        p_value=p_value,
        cliffs_delta=delta,
        magnitude=_delta_magnitude(delta),
    )
