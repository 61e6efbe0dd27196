"""Offline snapshot directories: the frozen input format for all scoring.

Each package directory holds metadata.json, commits.jsonl, and prs.jsonl;
loading validates every record and reports all violations, not just the
first one.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from malta.model import (
    CommitRecord,
    PackageSnapshot,
    PullRequestRecord,
    PvacLabel,
    RepoMetadata,
    format_utc,
    parse_utc,
)

SNAPSHOT_FILES = ("metadata.json", "commits.jsonl", "prs.jsonl")


class SnapshotValidationError(Exception):
    """All schema and invariant violations found in one snapshot directory."""

    def __init__(self, directory: Path, problems: list[str]):
        self.directory = Path(directory)
        self.problems = list(problems)
        summary = "; ".join(self.problems[:5])
        if len(self.problems) > 5:
            summary += f"; ... ({len(self.problems)} problems total)"
        super().__init__(f"{self.directory}: {summary}")


def _expect(obj: dict, key: str, kinds, problems: list[str], where: str):
    if key not in obj:
        problems.append(f"{where}: missing field {key!r}")
        return None
    value = obj[key]
    if isinstance(value, bool) and bool not in (
        kinds if isinstance(kinds, tuple) else (kinds,)
    ):
        problems.append(f"{where}: field {key!r} must not be a boolean")
        return None
    if not isinstance(value, kinds):
        problems.append(f"{where}: field {key!r} has wrong type {type(value).__name__}")
        return None
    return value


def _parse_metadata(path: Path, problems: list[str]):
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        problems.append(f"metadata.json: unreadable ({exc})")
        return None
    if not isinstance(raw, dict):
        problems.append("metadata.json: top-level value must be an object")
        return None

    name = _expect(raw, "name", str, problems, "metadata.json")
    if name is not None and not name:
        problems.append("metadata.json: name must be non-empty")
    counts = {}
    for key in ("stars", "forks", "watchers", "open_issues"):
        value = _expect(raw, key, int, problems, "metadata.json")
        if value is not None and value < 0:
            problems.append(f"metadata.json: {key} must be >= 0, got {value}")
            value = None
        counts[key] = value
    archived = _expect(raw, "archived", bool, problems, "metadata.json")
    if "fetched_at" in raw:
        try:
            parse_utc(raw["fetched_at"], "metadata.json fetched_at")
        except (ValueError, TypeError) as exc:
            problems.append(str(exc))

    pvac = None
    if raw.get("pvac_label") is not None:
        try:
            pvac = PvacLabel.parse(str(raw["pvac_label"]))
        except ValueError as exc:
            problems.append(f"metadata.json: {exc}")

    vnd = raw.get("vnd")
    if vnd is not None:
        if isinstance(vnd, bool) or not isinstance(vnd, (int, float)) or vnd < 0:
            problems.append(f"metadata.json: vnd must be a non-negative number, got {vnd!r}")
            vnd = None
        else:
            vnd = float(vnd)

    if problems:
        return None
    meta = RepoMetadata(
        stars=counts["stars"],
        forks=counts["forks"],
        watchers=counts["watchers"],
        open_issues=counts["open_issues"],
        archived=archived,
    )
    return name, meta, pvac, vnd


def _iter_jsonl(path: Path, problems: list[str]):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        problems.append(f"{path.name}: unreadable ({exc})")
        return
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            problems.append(f"{path.name}:{lineno}: invalid JSON ({exc.msg})")
            continue
        if not isinstance(obj, dict):
            problems.append(f"{path.name}:{lineno}: record must be an object")
            continue
        yield lineno, obj


def _parse_commits(path: Path, problems: list[str]) -> list[CommitRecord]:
    commits = []
    for lineno, obj in _iter_jsonl(path, problems):
        where = f"{path.name}:{lineno}"
        commit_id = _expect(obj, "id", str, problems, where)
        ts_raw = _expect(obj, "timestamp", str, problems, where)
        parents = _expect(obj, "parent_count", int, problems, where)
        paths = _expect(obj, "changed_paths", list, problems, where)
        if None in (commit_id, ts_raw, parents, paths):
            continue
        if not all(isinstance(p, str) for p in paths):
            problems.append(f"{where}: changed_paths must contain only strings")
            continue
        try:
            timestamp = parse_utc(ts_raw, f"{where} timestamp")
            commits.append(
                CommitRecord(
                    id=commit_id,
                    timestamp=timestamp,
                    parent_count=parents,
                    changed_paths=tuple(paths),
                )
            )
        except ValueError as exc:
            problems.append(str(exc))
    return commits


def _parse_prs(path: Path, problems: list[str]) -> list[PullRequestRecord]:
    prs = []
    seen_ids: set[str] = set()
    for lineno, obj in _iter_jsonl(path, problems):
        where = f"{path.name}:{lineno}"
        pr_id = _expect(obj, "id", str, problems, where)
        created_raw = _expect(obj, "created_at", str, problems, where)
        if pr_id is None or created_raw is None:
            continue
        if pr_id in seen_ids:
            problems.append(f"{where}: duplicate pull request id {pr_id!r}")
            continue
        seen_ids.add(pr_id)
        stamps = {}
        bad = False
        for key in ("closed_at", "merged_at"):
            value = obj.get(key)
            if value is None:
                stamps[key] = None
            elif not isinstance(value, str):
                problems.append(f"{where}: field {key!r} must be a string or null")
                bad = True
            else:
                stamps[key] = value
        if bad:
            continue
        try:
            prs.append(
                PullRequestRecord(
                    id=pr_id,
                    created_at=parse_utc(created_raw, f"{where} created_at"),
                    closed_at=(
                        parse_utc(stamps["closed_at"], f"{where} closed_at")
                        if stamps["closed_at"]
                        else None
                    ),
                    merged_at=(
                        parse_utc(stamps["merged_at"], f"{where} merged_at")
                        if stamps["merged_at"]
                        else None
                    ),
                )
            )
        except ValueError as exc:
            problems.append(f"{where}: {exc}")
    return prs


def load_snapshot(directory: Path | str) -> PackageSnapshot:
    """Load and fully validate one package snapshot directory.

    Raises SnapshotValidationError enumerating every violation found.
    """
    directory = Path(directory)
    problems: list[str] = []
    for filename in SNAPSHOT_FILES:
        if not (directory / filename).is_file():
            problems.append(f"missing required file {filename}")
    if problems:
        raise SnapshotValidationError(directory, problems)

    meta_parsed = _parse_metadata(directory / "metadata.json", problems)
    commits = _parse_commits(directory / "commits.jsonl", problems)
    prs = _parse_prs(directory / "prs.jsonl", problems)
    if problems or meta_parsed is None:
        raise SnapshotValidationError(directory, problems)

    name, meta, pvac, vnd = meta_parsed
    return PackageSnapshot(
        name=name,
        commits=tuple(commits),
        pull_requests=tuple(prs),
        metadata=meta,
        pvac_label=pvac,
        vnd=vnd,
    )


def write_snapshot(
    snapshot: PackageSnapshot,
    directory: Path | str,
    fetched_at: datetime | None = None,
) -> Path:
    """Write the three snapshot files for a package; returns the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fetched = fetched_at or datetime.now(timezone.utc)

    meta = {
        "name": snapshot.name,
        "stars": snapshot.metadata.stars,
        "forks": snapshot.metadata.forks,
        "watchers": snapshot.metadata.watchers,
        "open_issues": snapshot.metadata.open_issues,
        "archived": snapshot.metadata.archived,
        "pvac_label": snapshot.pvac_label.value if snapshot.pvac_label else None,
        "vnd": snapshot.vnd,
        "fetched_at": format_utc(fetched),
    }
    (directory / "metadata.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )

    with (directory / "commits.jsonl").open("w", encoding="utf-8") as fh:
        for c in snapshot.commits:
            fh.write(
                json.dumps(
                    {
                        "id": c.id,
                        "timestamp": format_utc(c.timestamp),
                        "parent_count": c.parent_count,
                        "changed_paths": list(c.changed_paths),
                    }
                )
                + "\n"
            )

    with (directory / "prs.jsonl").open("w", encoding="utf-8") as fh:
        for pr in snapshot.pull_requests:
            fh.write(
                json.dumps(
                    {
                        "id": pr.id,
                        "created_at": format_utc(pr.created_at),
                        "closed_at": format_utc(pr.closed_at) if pr.closed_at else None,
                        "merged_at": format_utc(pr.merged_at) if pr.merged_at else None,
                    }
                )
                + "\n"
            )
    return directory


@dataclass(frozen=True)
class SnapshotManifest:
    """Index of one dataset directory: (package name, directory) pairs."""

    dataset_name: str
    fetched_at: datetime
    packages: tuple[tuple[str, Path], ...]

    @classmethod
    def discover(cls, root: Path | str, dataset_name: str | None = None) -> "SnapshotManifest":
        root = Path(root)
        if not root.is_dir():
            raise FileNotFoundError(f"dataset directory not found: {root}")
        packages = discover_packages(root)
        return cls(
            dataset_name=dataset_name or root.name,
            fetched_at=datetime.now(timezone.utc),
            packages=tuple(packages),
        )


def discover_packages(root: Path | str) -> list[tuple[str, Path]]:
    """Sorted (name, dir) pairs for subdirectories holding metadata.json."""
    root = Path(root)
    found = []
    for child in sorted(root.iterdir()):
        if child.is_dir() and (child / "metadata.json").is_file():
            found.append((child.name, child))
    return found


def dataset_fingerprint(packages: list[tuple[str, Path]]) -> str:
    """Content hash over all snapshot files, stable across runs."""
    digest = hashlib.sha256()
    for name, directory in sorted(packages):
        for filename in SNAPSHOT_FILES:
            path = directory / filename
            file_hash = hashlib.sha256()
            if path.is_file():
                file_hash.update(path.read_bytes())
            digest.update(f"{name}/{filename}:{file_hash.hexdigest()}\n".encode())
    return digest.hexdigest()


def load_dataset(
    root: Path | str,
) -> tuple[list[PackageSnapshot], list[tuple[str, SnapshotValidationError]]]:
    """Load every package under root; collect per-package failures."""
    snapshots = []
    failures = []
    for name, directory in discover_packages(root):
        try:
            snapshots.append(load_snapshot(directory))
        except SnapshotValidationError as exc:
            failures.append((name, exc))
    return snapshots, failures
