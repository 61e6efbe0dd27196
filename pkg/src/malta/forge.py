"""GitHub REST client that materializes offline snapshot directories.

The client only produces snapshot files; all scoring reads those files, so
a fetched package is frozen and reproducible from then on. Output records
are sorted by primary key before writing, making file content deterministic
for identical remote state regardless of response interleaving.
"""

from __future__ import annotations

import os
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlparse

import requests

from malta.model import (
    CommitRecord,
    PackageSnapshot,
    PullRequestRecord,
    RepoMetadata,
    ensure_utc,
    parse_utc,
)
from malta.snapshot import write_snapshot

DEFAULT_API_BASE = "https://api.github.com"
USER_AGENT = "malta-snapshot-client"


class ForgeError(Exception):
    """Transport or protocol failure talking to the forge API."""


class RepoNotFoundError(ForgeError):
    """The requested repository does not exist (HTTP 404)."""


class RateLimitExhaustedError(ForgeError):
    """Rate limit still exhausted after honoring the server's retry hints."""

    def __init__(self, remaining: str | None, reset_at: str | None):
        self.remaining = remaining
        self.reset_at = reset_at
        super().__init__(
            f"rate limit exhausted (remaining quota: {remaining or 'unknown'}, "
            f"resets at epoch {reset_at or 'unknown'})"
        )


def parse_repo_url(repo_url: str) -> tuple[str, str]:
    """Accepts https://github.com/owner/repo(.git) or plain owner/repo."""
    text = repo_url.strip().removesuffix(".git").rstrip("/")
    if "://" in text:
        path = urlparse(text).path
    else:
        path = text
    parts = [p for p in path.split("/") if p]
    if len(parts) < 2:
        raise ValueError(f"cannot extract owner/repo from {repo_url!r}")
    return parts[-2], parts[-1]


class ForgeClient:
    """Paginated REST access with rate-limit handling.

    The session is injectable for testing; `sleep` likewise. At most
    `concurrency` page requests run at once.
    """

    def __init__(
        self,
        token: str | None = None,
        api_base: str = DEFAULT_API_BASE,
        session=None,
        page_size: int = 100,
        concurrency: int = 1,
        rate_limit_retries: int = 2,
        max_wait_seconds: float = 120.0,
        sleep=time.sleep,
    ):
        if not (1 <= page_size <= 100):
            raise ValueError("page_size must be in [1, 100]")
        if concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.api_base = api_base.rstrip("/")
        self.page_size = page_size
        self.concurrency = concurrency
        self.rate_limit_retries = rate_limit_retries
        self.max_wait_seconds = max_wait_seconds
        self._sleep = sleep
        self._session = session or requests.Session()
        self._headers = {
            "Accept": "application/vnd.github+json",
            "User-Agent": USER_AGENT,
        }
        if token:
            self._headers["Authorization"] = f"Bearer {token}"

    def _get(self, path: str, params: dict | None = None):
        url = f"{self.api_base}{path}"
        attempts = 0
        while True:
            try:
                response = self._session.get(
                    url, params=params, headers=self._headers, timeout=30.0
                )
            except requests.RequestException as exc:
                raise ForgeError(f"request to {path} failed: {exc}") from exc
            if response.status_code == 404:
                raise RepoNotFoundError(f"repository not found: {path}")
            if response.status_code in (403, 429) and self._is_rate_limited(response):
                if attempts >= self.rate_limit_retries:
                    raise RateLimitExhaustedError(
                        response.headers.get("X-RateLimit-Remaining"),
                        response.headers.get("X-RateLimit-Reset"),
                    )
                self._sleep(self._retry_delay(response))
                attempts += 1
                continue
            if response.status_code >= 400:
                raise ForgeError(f"{path}: HTTP {response.status_code}")
            return response

    @staticmethod
    def _is_rate_limited(response) -> bool:
        return (
            response.headers.get("X-RateLimit-Remaining") == "0"
            or "Retry-After" in response.headers
        )

    def _retry_delay(self, response) -> float:
        retry_after = response.headers.get("Retry-After")
        if retry_after is not None:
            delay = float(retry_after)
        else:
            reset = float(response.headers.get("X-RateLimit-Reset", 0))
            delay = max(0.0, reset - time.time())
        return min(delay, self.max_wait_seconds)

    def _paginated(self, path: str, params: dict | None = None) -> list[dict]:
        params = dict(params or {})
        params["per_page"] = self.page_size
        params["page"] = 1
        first = self._get(path, params)
        items = list(first.json())
        last_page = self._last_page(first)
        if last_page <= 1:
            # No Link header: walk pages until a short one.
            page = 2
            current = items
            while len(current) == self.page_size:
                params["page"] = page
                current = list(self._get(path, params).json())
                items.extend(current)
                page += 1
            return items

        def fetch(page: int) -> list[dict]:
            page_params = dict(params)
            page_params["page"] = page
            return list(self._get(path, page_params).json())

        remaining = range(2, last_page + 1)
        if self.concurrency > 1:
            with ThreadPoolExecutor(max_workers=self.concurrency) as pool:
                for chunk in pool.map(fetch, remaining):
                    items.extend(chunk)
        else:
            for page in remaining:
                items.extend(fetch(page))
        return items

    @staticmethod
    def _last_page(response) -> int:
        link = response.headers.get("Link", "")
        for part in link.split(","):
            if 'rel="last"' in part:
                url = part.split(";")[0].strip().strip("<>")
                for pair in urlparse(url).query.split("&"):
                    if pair.startswith("page="):
                        return int(pair.split("=", 1)[1])
        return 1

    def repo_metadata(self, owner: str, repo: str) -> dict:
        return self._get(f"/repos/{owner}/{repo}").json()

    def list_commits(self, owner: str, repo: str, until: datetime) -> list[dict]:
        params = {"until": until.astimezone(timezone.utc).isoformat()}
        return self._paginated(f"/repos/{owner}/{repo}/commits", params)

    def list_pulls(self, owner: str, repo: str) -> list[dict]:
        return self._paginated(
            f"/repos/{owner}/{repo}/pulls", {"state": "all", "sort": "created"}
        )


def _pr_sort_key(pr: PullRequestRecord):
    return (0, int(pr.id)) if pr.id.isdigit() else (1, pr.id)


def _clip_to_clock(stamp: str | None, clock: datetime, what: str) -> datetime | None:
    """Timestamps after the snapshot clock are treated as not yet happened."""
    if stamp is None:
        return None
    parsed = parse_utc(stamp, what)
    return parsed if parsed <= clock else None


def build_snapshot(
    name: str,
    meta_raw: dict,
    commits_raw: list[dict],
    pulls_raw: list[dict],
    clock: datetime,
    exclude_bots: bool = False,
) -> PackageSnapshot:
    """Convert raw API payloads into a validated snapshot."""
    watchers = meta_raw.get("subscribers_count")
    if watchers is None:
        watchers = meta_raw.get("watchers_count", 0)
    metadata = RepoMetadata(
        stars=int(meta_raw.get("stargazers_count", 0)),
        forks=int(meta_raw.get("forks_count", 0)),
        watchers=int(watchers),
        open_issues=int(meta_raw.get("open_issues_count", 0)),
        archived=bool(meta_raw.get("archived", False)),
    )

    commits = []
    for item in commits_raw:
        detail = item.get("commit", {})
        date = (detail.get("author") or {}).get("date") or (
            detail.get("committer") or {}
        ).get("date")
        if date is None:
            raise ForgeError(f"commit {item.get('sha')!r} has no timestamp")
        timestamp = parse_utc(date, f"commit {item.get('sha')}")
        if timestamp > clock:
            continue
        commits.append(
            CommitRecord(
                id=str(item["sha"]),
                timestamp=timestamp,
                parent_count=len(item.get("parents", [])),
                changed_paths=(),
            )
        )
    commits.sort(key=lambda c: c.id)

    prs = []
    for item in pulls_raw:
        if exclude_bots and (item.get("user") or {}).get("type") == "Bot":
            continue
        number = item.get("number")
        created = parse_utc(item["created_at"], f"pr {number} created_at")
        if created > clock:
            continue
        prs.append(
            PullRequestRecord(
                id=str(number),
                created_at=created,
                closed_at=_clip_to_clock(item.get("closed_at"), clock, f"pr {number} closed_at"),
                merged_at=_clip_to_clock(item.get("merged_at"), clock, f"pr {number} merged_at"),
            )
        )
    prs.sort(key=_pr_sort_key)

    return PackageSnapshot(
        name=name,
        commits=tuple(commits),
        pull_requests=tuple(prs),
        metadata=metadata,
    )


def fetch_forge(
    repo_url: str,
    out_dir: Path | str,
    *,
    token: str | None = None,
    clock: datetime | None = None,
    name: str | None = None,
    client: ForgeClient | None = None,
    exclude_bots: bool = False,
) -> PackageSnapshot:
    """Fetch one repository and write its snapshot directory atomically.

    On any failure (including partial pagination) the target directory is
    left untouched; the token is used for authorization only and never
    logged or persisted.
    """
    owner, repo = parse_repo_url(repo_url)
    clock = ensure_utc(clock, "clock") if clock else datetime.now(timezone.utc)
    client = client or ForgeClient(token=token)

    meta_raw = client.repo_metadata(owner, repo)
    commits_raw = client.list_commits(owner, repo, until=clock)
    pulls_raw = client.list_pulls(owner, repo)
    snap = build_snapshot(
        name or repo, meta_raw, commits_raw, pulls_raw, clock, exclude_bots
    )

    target = Path(out_dir)
    tmp = target.parent / f".{target.name}.tmp-{os.getpid()}"
    if tmp.exists():
        shutil.rmtree(tmp)
    try:
        write_snapshot(snap, tmp, fetched_at=clock)
        if target.exists():
            shutil.rmtree(target)
        os.replace(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return snap
