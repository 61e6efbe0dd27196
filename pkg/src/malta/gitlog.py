"""Commit-history extraction from git log output.

The wire format keeps parsing trivial and unambiguous: every record starts
with an ASCII unit separator (0x1f) sentinel followed by three 0x1f-terminated
header fields, then the name-only path list:

    git log --date=iso-strict --name-only --no-renames \\
        --pretty=format:'%x1f%H%x1f%ad%x1f%P%x1f'

Header fields are the commit hash, the ISO-8601 author date, and the
space-separated parent hashes.
"""

from __future__ import annotations

import re
import subprocess
from pathlib import Path
from typing import NamedTuple

from malta.model import CommitRecord, parse_utc

GIT_LOG_FORMAT = "%x1f%H%x1f%ad%x1f%P%x1f"

_HASH_RE = re.compile(r"^[0-9a-fA-F]{4,64}$")


class GitLogStreamError(Exception):
    """The stream as a whole is unusable (truncated or wrong format)."""


class GitLogRecordError(NamedTuple):
    """One malformed record, located by its line in the input stream."""

    line: int
    message: str


class GitLogResult(NamedTuple):
    commits: list[CommitRecord]
    errors: list[GitLogRecordError]


def git_log_command(repo_path: Path | str) -> list[str]:
    """The exact git invocation that produces the expected stream."""
    return [
        "git",
        "-C",
        str(repo_path),
        "log",
        "--date=iso-strict",
        "--name-only",
        "--no-renames",
        f"--pretty=format:{GIT_LOG_FORMAT}",
    ]


def read_repository_log(repo_path: Path | str) -> bytes:
    """Run git log against a local clone and return the raw stream."""
    proc = subprocess.run(
        git_log_command(repo_path), capture_output=True, check=False
    )
    if proc.returncode != 0:
        stderr = proc.stderr.decode("utf-8", errors="replace").strip()
        raise GitLogStreamError(f"git log failed for {repo_path}: {stderr}")
    return proc.stdout


def parse_git_log(raw: bytes | str) -> GitLogResult:
    """Parse a git log stream into commit records.

    Order-preserving and loss-free: every record in the stream becomes
    either a CommitRecord or a GitLogRecordError carrying its line number.
    Structural damage (content before the first sentinel, or a record cut
    off mid-header) raises GitLogStreamError instead.
    """
    text = raw.decode("utf-8", errors="replace") if isinstance(raw, bytes) else raw
    if text == "":
        return GitLogResult(commits=[], errors=[])

    chunks = text.split("\x1f")
    if chunks[0].strip():
        raise GitLogStreamError("unexpected content before the first record sentinel")
    if (len(chunks) - 1) % 4 != 0:
        raise GitLogStreamError(
            "truncated stream: record cut off mid-header "
            f"({len(chunks) - 1} fields is not a multiple of 4)"
        )

    commits: list[CommitRecord] = []
    errors: list[GitLogRecordError] = []
    line = 1 + chunks[0].count("\n")
    for i in range(1, len(chunks), 4):
        commit_hash, date_field, parents_field, body = chunks[i : i + 4]
        record_line = line
        line += sum(chunk.count("\n") for chunk in chunks[i : i + 4])

        commit_hash = commit_hash.strip()
        if not _HASH_RE.match(commit_hash):
            errors.append(GitLogRecordError(record_line, f"invalid commit hash {commit_hash!r}"))
            continue
        try:
            timestamp = parse_utc(date_field.strip(), f"commit {commit_hash[:12]}")
        except ValueError as exc:
            errors.append(GitLogRecordError(record_line, str(exc)))
            continue
        parent_tokens = parents_field.split()
        if not all(_HASH_RE.match(tok) for tok in parent_tokens):
            errors.append(
                GitLogRecordError(record_line, f"invalid parent field {parents_field!r}")
            )
            continue
        paths = tuple(p for p in (s.strip() for s in body.splitlines()) if p)
        commits.append(
            CommitRecord(
                id=commit_hash,
                timestamp=timestamp,
                parent_count=len(parent_tokens),
                changed_paths=paths,
            )
        )
    return GitLogResult(commits=commits, errors=errors)
