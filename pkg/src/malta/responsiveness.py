"""Maintainer responsiveness score from pull-request outcomes.

Only pull requests opened during the evaluation window count; the score
combines the decision rate, the median decision delay, and the median
staleness of still-open requests.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from malta._kernels import median_clamped_ratio
from malta.model import (
    MaltaConfig,
    ObservationWindows,
    PullRequestRecord,
    SECONDS_PER_DAY,
)


class PrPartition(NamedTuple):
    """Evaluation-window pull requests split by outcome at window end."""

    terminal: tuple[PullRequestRecord, ...]
    open: tuple[PullRequestRecord, ...]


class MrsResult(NamedTuple):
    s_resp: float
    r_dec: float
    d_dec: float | None
    p_stale: float


def partition_prs(
    prs: Sequence[PullRequestRecord], windows: ObservationWindows
) -> PrPartition:
    """Split PRs created in [eval_start, eval_end) by decision status.

    A PR is terminal when its merge or close time also falls inside the
    window; one decided only after eval_end still counts as open.
    """
    start, end = windows.eval_start, windows.eval_end
    terminal: list[PullRequestRecord] = []
    still_open: list[PullRequestRecord] = []
    for pr in prs:
        if not (start <= pr.created_at < end):
            continue
        decided = (pr.merged_at is not None and start <= pr.merged_at < end) or (
            pr.closed_at is not None and start <= pr.closed_at < end
        )
        if decided:
            terminal.append(pr)
        else:
            still_open.append(pr)
    return PrPartition(terminal=tuple(terminal), open=tuple(still_open))


def compute_mrs(
    partition: PrPartition, windows: ObservationWindows, cfg: MaltaConfig
) -> MrsResult | None:
    """Responsiveness score R_dec * (1 - D_dec) * (1 - P_stale).

    Returns None (undefined, not zero) when no PRs were opened in the
    window; returns 0 when PRs exist but none reached a decision. Delays
    and ages are measured in fractional days and capped at t_ref_days.
    """
    n_terminal = len(partition.terminal)
    n_open = len(partition.open)
    n_total = n_terminal + n_open
    if n_total == 0:
        return None

    if n_open:
        ages = np.fromiter(
            (
                (windows.eval_end - pr.created_at).total_seconds() / SECONDS_PER_DAY
                for pr in partition.open
            ),
            dtype=np.float64,
            count=n_open,
        )
        p_stale = median_clamped_ratio(ages, cfg.t_ref_days)
    else:
        p_stale = 0.0

    if n_terminal == 0:
        return MrsResult(s_resp=0.0, r_dec=0.0, d_dec=None, p_stale=p_stale)

    delays = np.fromiter(
        (
            (pr.terminal_at - pr.created_at).total_seconds() / SECONDS_PER_DAY
            for pr in partition.terminal
        ),
        dtype=np.float64,
        count=n_terminal,
    )
    d_dec = median_clamped_ratio(delays, cfg.t_ref_days)
    r_dec = n_terminal / n_total
    s_resp = r_dec * (1.0 - d_dec) * (1.0 - p_stale)
    return MrsResult(s_resp=s_resp, r_dec=r_dec, d_dec=d_dec, p_stale=p_stale)
