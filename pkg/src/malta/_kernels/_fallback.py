"""NumPy implementations of the event-window and rank-statistic kernels.

Mirrors malta._kernels._native function for function; results are
bit-identical between the two backends (rank sums stay on the half-integer
lattice, so summation order cannot change them).
"""

from __future__ import annotations

import numpy as np

BACKEND = "fallback"


def window_count(times, flags, start: float, end: float) -> int:
    """Count flagged events with start <= t < end (epoch seconds)."""
    t = np.asarray(times, dtype=np.float64)
    f = np.asarray(flags, dtype=np.uint8)
    return int(np.count_nonzero((f != 0) & (t >= start) & (t < end)))


def latest_flagged_at_or_before(times, flags, cutoff: float) -> float:
    """Most recent flagged event time <= cutoff, or NaN when there is none."""
    t = np.asarray(times, dtype=np.float64)
    f = np.asarray(flags, dtype=np.uint8)
    selected = t[(f != 0) & (t <= cutoff)]
    if selected.size == 0:
        return float("nan")
    return float(selected.max())


def median_clamped_ratio(values, scale: float) -> float:
    """Median of min(1, v / scale); NaN for an empty input."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return float("nan")
    clamped = np.minimum(1.0, v / scale)
    clamped.sort()
    mid = clamped.size // 2
    if clamped.size % 2 == 1:
        return float(clamped[mid])
    return float((clamped[mid - 1] + clamped[mid]) / 2.0)


def _tied_ranks(sorted_values: np.ndarray) -> tuple[np.ndarray, float]:
    """1-based average ranks for a sorted array plus the tie term sum(t^3 - t)."""
    n = sorted_values.size
    boundaries = np.flatnonzero(sorted_values[1:] != sorted_values[:-1])
    starts = np.concatenate(([0], boundaries + 1))
    ends = np.concatenate((boundaries + 1, [n]))
    sizes = ends - starts
    avg = (starts + ends + 1) / 2.0
    ranks = np.repeat(avg, sizes)
    tie_sum = float(np.sum(sizes.astype(np.float64) ** 3 - sizes))
    return ranks, tie_sum


def rank_auc(scores, labels) -> float:
    """Tie-aware rank AUC: P(random positive outscores random negative)."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.uint8)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d arrays of equal length")
    n_pos = int(np.count_nonzero(y))
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("need at least one positive and one negative label")
    order = np.argsort(s, kind="stable")
    ranks, _ = _tied_ranks(s[order])
    pos_rank_sum = float(ranks[y[order] != 0].sum())
    u = pos_rank_sum - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def mann_whitney_u(a, b) -> tuple[float, float]:
    """U statistic for sample a (average-rank ties) and the tie term.

    Returns (u_a, sum(t^3 - t)) where the tie term feeds the normal
    approximation's variance correction.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    combined = np.concatenate((x, y))
    order = np.argsort(combined, kind="stable")
    ranks_sorted, tie_sum = _tied_ranks(combined[order])
    ranks = np.empty_like(ranks_sorted)
    ranks[order] = ranks_sorted
    rank_sum_a = float(ranks[: x.size].sum())
    u_a = rank_sum_a - x.size * (x.size + 1) / 2.0
    return u_a, tie_sum


def cliffs_delta(a, b) -> float:
    """Cliff's delta: (wins - losses) / (len(a) * len(b))."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    y_sorted = np.sort(y)
    below = np.searchsorted(y_sorted, x, side="left")
    at_or_below = np.searchsorted(y_sorted, x, side="right")
    wins = int(below.sum())
    ties = int((at_or_below - below).sum())
    losses = x.size * y.size - wins - ties
    return (wins - losses) / (x.size * y.size)
