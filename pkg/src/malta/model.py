"""Domain types and threshold classifiers for maintenance scoring.

All types are immutable value objects validated at construction; timestamps
are normalized to UTC and compared at second precision.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from enum import Enum

from dateutil.relativedelta import relativedelta

SECONDS_PER_DAY = 86400.0


class MaintenanceLevel(Enum):
    """Five-level interpretive scale for the 0-100 score."""

    SUSTAINED = "sustained"
    STABLE = "stable"
    DECLINING = "declining"
    PROBABLE_ABANDONMENT = "probable_abandonment"
    EFFECTIVE_ABANDONMENT = "effective_abandonment"


class RiskLevel(Enum):
    """Three-level risk category used by both MALTA and version-lag views."""

    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class PvacLabel(Enum):
    """Externally supplied activity category (evaluation ground truth)."""

    VERY_ACTIVE = "very_active"
    MODERATELY_ACTIVE = "moderately_active"
    LIGHTLY_ACTIVE = "lightly_active"
    SEDENTARY = "sedentary"

    @classmethod
    def parse(cls, raw: str) -> "PvacLabel":
        """Parse a label leniently: case, spaces, and underscores ignored."""
        key = "".join(ch for ch in raw.lower() if ch.isalpha())
        for member in cls:
            if key == member.value.replace("_", ""):
                return member
        raise ValueError(f"unknown activity label: {raw!r}")


def ensure_utc(dt: datetime, what: str = "timestamp") -> datetime:
    """Require a timezone-aware datetime and normalize it to UTC."""
    if not isinstance(dt, datetime) or dt.tzinfo is None:
        raise ValueError(f"{what} must be a timezone-aware datetime: {dt!r}")
    return dt.astimezone(timezone.utc)


def parse_utc(value: str, what: str = "timestamp") -> datetime:
    """Parse an RFC 3339 / ISO 8601 timestamp with an explicit offset."""
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise ValueError(f"{what}: unparseable timestamp {value!r}") from exc
    if dt.tzinfo is None:
        raise ValueError(f"{what}: timestamp {value!r} lacks a UTC offset")
    return dt.astimezone(timezone.utc)


def format_utc(dt: datetime) -> str:
    """Render a UTC datetime in RFC 3339 form with a trailing Z."""
    return ensure_utc(dt).isoformat().replace("+00:00", "Z")


def span_days(start: datetime, end: datetime) -> float:
    """Exact day count between two instants (fractional when not aligned)."""
    return (end - start).total_seconds() / SECONDS_PER_DAY


@dataclass(frozen=True)
class ObservationWindows:
    """Contiguous baseline and evaluation intervals, both half-open.

    baseline = [baseline_start, baseline_end), eval = [eval_start, eval_end),
    with baseline_end == eval_start.
    """

    baseline_start: datetime
    baseline_end: datetime
    eval_start: datetime
    eval_end: datetime

    DEFAULT_BASELINE_MONTHS = 24
    DEFAULT_EVAL_MONTHS = 18

    def __post_init__(self):
        for name in ("baseline_start", "baseline_end", "eval_start", "eval_end"):
            object.__setattr__(self, name, ensure_utc(getattr(self, name), name))
        if self.baseline_end != self.eval_start:
            raise ValueError("windows must be contiguous: baseline_end != eval_start")
        if not (self.baseline_start < self.baseline_end < self.eval_end):
            raise ValueError("windows must satisfy baseline_start < baseline_end < eval_end")

    @classmethod
    def from_eval_end(
        cls,
        eval_end: datetime,
        baseline_months: int = DEFAULT_BASELINE_MONTHS,
        eval_months: int = DEFAULT_EVAL_MONTHS,
    ) -> "ObservationWindows":
        """Derive both windows backwards from the evaluation end date."""
        end = ensure_utc(eval_end, "eval_end")
        eval_start = end - relativedelta(months=eval_months)
        baseline_start = eval_start - relativedelta(months=baseline_months)
        return cls(baseline_start, eval_start, eval_start, end)

    @property
    def baseline_days(self) -> float:
        return span_days(self.baseline_start, self.baseline_end)

    @property
    def eval_days(self) -> float:
        return span_days(self.eval_start, self.eval_end)

    def to_dict(self) -> dict:
        return {
            "baseline_start": format_utc(self.baseline_start),
            "baseline_end": format_utc(self.baseline_end),
            "eval_start": format_utc(self.eval_start),
            "eval_end": format_utc(self.eval_end),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObservationWindows":
        return cls(*(parse_utc(data[k], k) for k in
                     ("baseline_start", "baseline_end", "eval_start", "eval_end")))


@dataclass(frozen=True)
class CommitRecord:
    """One commit: opaque id, UTC timestamp, parent count, changed paths."""

    id: str
    timestamp: datetime
    parent_count: int = 1
    changed_paths: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "timestamp", ensure_utc(self.timestamp, "commit timestamp"))
        object.__setattr__(self, "changed_paths", tuple(self.changed_paths))
        if self.parent_count < 0:
            raise ValueError(f"commit {self.id}: parent_count must be >= 0")


@dataclass(frozen=True)
class PullRequestRecord:
    """One pull request; a merged PR is terminal even without closed_at."""

    id: str
    created_at: datetime
    closed_at: datetime | None = None
    merged_at: datetime | None = None

    def __post_init__(self):
        object.__setattr__(self, "created_at", ensure_utc(self.created_at, "pr created_at"))
        for name in ("closed_at", "merged_at"):
            value = getattr(self, name)
            if value is not None:
                value = ensure_utc(value, f"pr {name}")
                object.__setattr__(self, name, value)
                if value < self.created_at:
                    raise ValueError(f"pr {self.id}: {name} precedes created_at")

    @property
    def terminal_at(self) -> datetime | None:
        """Decision timestamp: merge time when merged, else close time."""
        return self.merged_at if self.merged_at is not None else self.closed_at


@dataclass(frozen=True)
class RepoMetadata:
    """Forge-level repository counters and archival status."""

    stars: int = 0
    forks: int = 0
    watchers: int = 0
    open_issues: int = 0
    archived: bool = False

    def __post_init__(self):
        for name in ("stars", "forks", "watchers", "open_issues"):
            if getattr(self, name) < 0:
                raise ValueError(f"metadata {name} must be >= 0")


@dataclass(frozen=True)
class PackageSnapshot:
    """One package's commits, PR events, and metadata for a fixed clock."""

    name: str
    commits: tuple[CommitRecord, ...] = ()
    pull_requests: tuple[PullRequestRecord, ...] = ()
    metadata: RepoMetadata = RepoMetadata()
    pvac_label: PvacLabel | None = None
    vnd: float | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("package name must be non-empty")
        object.__setattr__(self, "commits", tuple(self.commits))
        object.__setattr__(self, "pull_requests", tuple(self.pull_requests))
        if self.vnd is not None and not (self.vnd >= 0):
            raise ValueError(f"package {self.name}: vnd must be >= 0")


def _check_unit(value: float | None, name: str) -> None:
    if value is not None and not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")


@dataclass(frozen=True)
class ComponentScores:
    """Component scores plus the intermediate terms behind them.

    s_resp is None when the package saw no pull requests in the evaluation
    window (undefined, not zero); the optional intermediates follow it.
    """

    s_dev: float
    s_meta: float
    s_resp: float | None = None
    d_c: float = 0.0
    r_c: float = 0.0
    r_dec: float | None = None
    d_dec: float | None = None
    p_stale: float | None = None
    t_last_days: float | None = None

    def __post_init__(self):
        _check_unit(self.s_dev, "s_dev")
        _check_unit(self.s_meta, "s_meta")
        _check_unit(self.s_resp, "s_resp")
        _check_unit(self.r_c, "r_c")
        _check_unit(self.r_dec, "r_dec")
        _check_unit(self.d_dec, "d_dec")
        _check_unit(self.p_stale, "p_stale")
        if self.d_c < 0:
            raise ValueError("d_c must be >= 0")
        if self.t_last_days is not None and self.t_last_days < 0:
            raise ValueError("t_last_days must be >= 0")


@dataclass(frozen=True)
class MaltaResult:
    """Final score on both scales with its classification and breakdown."""

    s_final: float
    s_final_100: float
    maintenance_level: MaintenanceLevel
    risk_level: RiskLevel
    components: ComponentScores

    def __post_init__(self):
        _check_unit(self.s_final, "s_final")
        if self.s_final_100 != 100.0 * self.s_final:
            raise ValueError("s_final_100 must equal 100 * s_final")


@dataclass(frozen=True)
class MaltaConfig:
    """All tunable scoring and classification parameters."""

    tau_days: float = 180.0
    t_ref_days: float = 180.0
    alpha: float = 0.7
    beta_stars: float = 0.25
    beta_forks: float = 0.25
    beta_watchers: float = 0.25
    beta_issues: float = 0.25
    w_dev: float = 0.55
    w_resp: float = 0.35
    w_meta: float = 0.10
    risk_low_threshold: float = 0.60
    risk_high_threshold: float = 0.40
    vl_low_threshold: float = 1.0
    vl_high_threshold: float = 3.0
    time_lag_cap_days: float = 3652.0
    apply_archival_penalty: bool = True

    def __post_init__(self):
        if self.tau_days <= 0:
            raise ValueError("tau_days must be > 0")
        if self.t_ref_days <= 0:
            raise ValueError("t_ref_days must be > 0")
        if not (0.0 <= self.alpha <= 1.0):
            raise ValueError("alpha must be in [0, 1]")
        weights = (self.w_dev, self.w_resp, self.w_meta)
        betas = (self.beta_stars, self.beta_forks, self.beta_watchers, self.beta_issues)
        if min(weights) < 0 or abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError("component weights must be >= 0 and sum to 1")
        if min(betas) < 0 or abs(sum(betas) - 1.0) > 1e-12:
            raise ValueError("beta weights must be >= 0 and sum to 1")
        if not (0.0 <= self.risk_high_threshold < self.risk_low_threshold <= 1.0):
            raise ValueError("need 0 <= risk_high_threshold < risk_low_threshold <= 1")
        if not (0.0 <= self.vl_low_threshold < self.vl_high_threshold):
            raise ValueError("need 0 <= vl_low_threshold < vl_high_threshold")
        if self.time_lag_cap_days <= 0:
            raise ValueError("time_lag_cap_days must be > 0")

    def replace(self, **overrides) -> "MaltaConfig":
        """Return a copy with the given fields swapped (re-validated)."""
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "MaltaConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def classify_maintenance_level(s_final_100: float) -> MaintenanceLevel:
    """Map a 0-100 score onto the five-level scale.

    Each band includes its lower bound and excludes its upper bound; the
    top band includes 100.
    """
    if math.isnan(s_final_100) or not (0.0 <= s_final_100 <= 100.0):
        raise ValueError(f"score must be in [0, 100], got {s_final_100!r}")
    if s_final_100 >= 80.0:
        return MaintenanceLevel.SUSTAINED
    if s_final_100 >= 60.0:
        return MaintenanceLevel.STABLE
    if s_final_100 >= 40.0:
        return MaintenanceLevel.DECLINING
    if s_final_100 >= 20.0:
        return MaintenanceLevel.PROBABLE_ABANDONMENT
    return MaintenanceLevel.EFFECTIVE_ABANDONMENT


def classify_malta_risk(s_final: float, cfg: MaltaConfig) -> RiskLevel:
    """Collapse the unit-interval score into Low / Medium / High risk."""
    if math.isnan(s_final) or not (0.0 <= s_final <= 1.0):
        raise ValueError(f"score must be in [0, 1], got {s_final!r}")
    if s_final >= cfg.risk_low_threshold:
        return RiskLevel.LOW
    if s_final >= cfg.risk_high_threshold:
        return RiskLevel.MEDIUM
    return RiskLevel.HIGH
