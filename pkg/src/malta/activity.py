"""Development activity score: commit-velocity decay times recency.

Non-trivial commits exclude merges and documentation-only changes; rates
are per-day counts over the baseline and evaluation windows.
"""

from __future__ import annotations

import fnmatch
import functools
import math
import re
from dataclasses import dataclass
from datetime import datetime
from typing import NamedTuple, Sequence

import numpy as np

from malta._kernels import latest_flagged_at_or_before, window_count
from malta.model import (
    CommitRecord,
    MaltaConfig,
    ObservationWindows,
    PackageSnapshot,
    SECONDS_PER_DAY,
)

DEFAULT_DOC_GLOBS = (
    "*.md",
    "*.rst",
    "*.txt",
    "docs/**",
    "doc/**",
    "LICENSE*",
    ".github/**",
)


@dataclass(frozen=True)
class CommitFilterRules:
    """Which commits count as substantive maintenance activity.

    An empty glob tuple disables documentation filtering. Patterns match
    case-insensitively; `*` crosses directory separators (fnmatch rules).
    """

    doc_path_globs: tuple[str, ...] = DEFAULT_DOC_GLOBS
    exclude_merges: bool = True

    def __post_init__(self):
        object.__setattr__(self, "doc_path_globs", tuple(self.doc_path_globs))


@functools.lru_cache(maxsize=64)
def _doc_matcher(globs: tuple[str, ...]) -> re.Pattern:
    joined = "|".join(fnmatch.translate(g.lower()) for g in globs)
    return re.compile(joined)


def is_nontrivial(commit: CommitRecord, rules: CommitFilterRules) -> bool:
    """True unless the commit is a merge or touches only documentation paths.

    Commits without path data count as non-trivial: absent diff data must
    not erase activity.
    """
    if rules.exclude_merges and commit.parent_count > 1:
        return False
    if commit.changed_paths and rules.doc_path_globs:
        matcher = _doc_matcher(rules.doc_path_globs)
        if all(matcher.match(path.lower()) for path in commit.changed_paths):
            return False
    return True


def _event_arrays(
    commits: Sequence[CommitRecord], rules: CommitFilterRules
) -> tuple[np.ndarray, np.ndarray]:
    times = np.fromiter(
        (c.timestamp.timestamp() for c in commits), dtype=np.float64, count=len(commits)
    )
    flags = np.fromiter(
        (is_nontrivial(c, rules) for c in commits), dtype=np.uint8, count=len(commits)
    )
    return times, flags


def count_nontrivial(
    commits: Sequence[CommitRecord],
    window: tuple[datetime, datetime],
    rules: CommitFilterRules,
) -> int:
    """Number of non-trivial commits with timestamp in [start, end)."""
    start, end = window
    if not start < end:
        raise ValueError("window must satisfy start < end")
    times, flags = _event_arrays(commits, rules)
    return window_count(times, flags, start.timestamp(), end.timestamp())


def velocity_decay(lambda_b: float, lambda_e: float) -> float:
    """Ratio of evaluation to baseline commit rate.

    1 when activity appears from a silent baseline, 0 when both windows
    are silent.
    """
    if lambda_b < 0 or lambda_e < 0:
        raise ValueError("commit rates must be >= 0")
    if lambda_b > 0:
        return lambda_e / lambda_b
    return 1.0 if lambda_e > 0 else 0.0


def recency(t_last_days: float, tau_days: float) -> float:
    """Exponential recency term exp(-t_last / tau)."""
    if t_last_days < 0:
        raise ValueError("t_last_days must be >= 0")
    if tau_days <= 0:
        raise ValueError("tau_days must be > 0")
    return math.exp(-t_last_days / tau_days)


class DasResult(NamedTuple):
    s_dev: float
    d_c: float
    r_c: float
    t_last_days: float | None


def compute_das(
    snapshot: PackageSnapshot,
    windows: ObservationWindows,
    cfg: MaltaConfig,
    rules: CommitFilterRules,
) -> DasResult:
    """Development activity score: min(1, D_c) * exp(-t_last / tau).

    t_last looks back from eval_end over the whole history, not just the
    observation windows; with no non-trivial commit at or before eval_end
    the score is 0 and t_last is absent.
    """
    times, flags = _event_arrays(snapshot.commits, rules)
    eval_end = windows.eval_end.timestamp()

    c_b = window_count(
        times, flags, windows.baseline_start.timestamp(), windows.baseline_end.timestamp()
    )
    c_e = window_count(times, flags, windows.eval_start.timestamp(), eval_end)
    lambda_b = c_b / windows.baseline_days
    lambda_e = c_e / windows.eval_days
    d_c = velocity_decay(lambda_b, lambda_e)

    last = latest_flagged_at_or_before(times, flags, eval_end)
    if math.isnan(last):
        return DasResult(s_dev=0.0, d_c=d_c, r_c=0.0, t_last_days=None)

    t_last = (eval_end - last) / SECONDS_PER_DAY
    r_c = recency(t_last, cfg.tau_days)
    return DasResult(s_dev=min(1.0, d_c) * r_c, d_c=d_c, r_c=r_c, t_last_days=t_last)
