import json

import pytest

from malta.forge import (
    ForgeClient,
    ForgeError,
    RateLimitExhaustedError,
    RepoNotFoundError,
    build_snapshot,
    fetch_forge,
    parse_repo_url,
)
from malta.snapshot import load_snapshot
from synth import utc

CLOCK = utc(2025, 6, 30)

META_BODY = {
    "stargazers_count": 42,
    "forks_count": 7,
    "subscribers_count": 11,
    "watchers_count": 42,
    "open_issues_count": 3,
    "archived": False,
}


class FakeResponse:
    def __init__(self, status=200, body=None, headers=None):
        self.status_code = status
        self._body = body if body is not None else []
        self.headers = headers or {}

    def json(self):
        return self._body


class FakeSession:
    """Routes (path, page) to queued responses and records every call."""

    def __init__(self):
        self.routes = {}
        self.calls = []

    def add(self, path, response, page=1):
        self.routes.setdefault((path, page), []).append(response)

    def get(self, url, params=None, headers=None, timeout=None):
        path = url.replace("https://api.github.com", "")
        page = (params or {}).get("page", 1)
        self.calls.append((path, page, dict(params or {}), dict(headers or {})))
        queue = self.routes.get((path, page))
        if not queue:
            return FakeResponse(status=500)
        return queue.pop(0) if len(queue) > 1 else queue[0]


def commit_item(sha, date, parents=1):
    return {
        "sha": sha,
        "commit": {"author": {"date": date}, "committer": {"date": date}},
        "parents": [{"sha": "p"}] * parents,
    }


def pull_item(number, created, closed=None, merged=None, user_type="User"):
    return {
        "number": number,
        "created_at": created,
        "closed_at": closed,
        "merged_at": merged,
        "user": {"type": user_type},
    }


def make_session(meta=None, commits=(), pulls=(), page_size=100):
    session = FakeSession()
    session.add("/repos/owner/repo", FakeResponse(body=meta or dict(META_BODY)))
    commit_pages = [list(commits)[i : i + page_size] for i in range(0, len(commits), page_size)] or [[]]
    for page, chunk in enumerate(commit_pages, start=1):
        session.add("/repos/owner/repo/commits", FakeResponse(body=chunk), page=page)
    if len(commit_pages[-1]) == page_size:
        session.add("/repos/owner/repo/commits", FakeResponse(body=[]), page=len(commit_pages) + 1)
    pull_pages = [list(pulls)[i : i + page_size] for i in range(0, len(pulls), page_size)] or [[]]
    for page, chunk in enumerate(pull_pages, start=1):
        session.add("/repos/owner/repo/pulls", FakeResponse(body=chunk), page=page)
    if len(pull_pages[-1]) == page_size:
        session.add("/repos/owner/repo/pulls", FakeResponse(body=[]), page=len(pull_pages) + 1)
    return session


def client_for(session, **kwargs):
    return ForgeClient(token="secret", session=session, sleep=lambda s: None, **kwargs)


class TestParseRepoUrl:
    @pytest.mark.parametrize(
        "url",
        [
            "https://github.com/owner/repo",
            "https://github.com/owner/repo.git",
            "https://github.com/owner/repo/",
            "owner/repo",
        ],
    )
    def test_variants(self, url):
        assert parse_repo_url(url) == ("owner", "repo")

    def test_rejects_bare_name(self):
        with pytest.raises(ValueError):
            parse_repo_url("just-a-repo")


class TestFetch:
    def test_empty_pr_list(self, tmp_path):
        session = make_session()
        snap = fetch_forge(
            "owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session)
        )
        assert snap.pull_requests == ()
        assert (tmp_path / "repo" / "prs.jsonl").read_text() == ""

    def test_pagination_150_prs(self, tmp_path):
        pulls = [
            pull_item(n, "2025-01-01T00:00:00Z", closed="2025-01-02T00:00:00Z")
            for n in range(1, 151)
        ]
        session = make_session(pulls=pulls)
        snap = fetch_forge(
            "owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session)
        )
        assert len(snap.pull_requests) == 150
        pr_pages = [page for path, page, _, _ in session.calls if path.endswith("/pulls")]
        assert pr_pages == [1, 2]

    def test_records_sorted_by_primary_key(self, tmp_path):
        commits = [
            commit_item("fff", "2025-01-03T00:00:00Z"),
            commit_item("aaa", "2025-01-01T00:00:00Z"),
            commit_item("ccc", "2025-01-02T00:00:00Z"),
        ]
        pulls = [pull_item(n, "2025-01-01T00:00:00Z") for n in (11, 2, 30)]
        session = make_session(commits=commits, pulls=pulls)
        snap = fetch_forge(
            "owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session)
        )
        assert [c.id for c in snap.commits] == ["aaa", "ccc", "fff"]
        assert [p.id for p in snap.pull_requests] == ["2", "11", "30"]

    def test_archived_round_trips(self, tmp_path):
        meta = dict(META_BODY, archived=True)
        session = make_session(meta=meta)
        snap = fetch_forge(
            "owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session)
        )
        assert snap.metadata.archived is True
        assert load_snapshot(tmp_path / "repo") == snap

    def test_fetch_then_load_reproduces_snapshot(self, tmp_path):
        commits = [commit_item("abc", "2025-01-01T12:34:56Z", parents=2)]
        pulls = [
            pull_item(1, "2025-01-05T00:00:00Z", merged="2025-01-06T00:00:00Z", closed="2025-01-06T00:00:00Z")
        ]
        session = make_session(commits=commits, pulls=pulls)
        snap = fetch_forge(
            "owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session)
        )
        assert load_snapshot(tmp_path / "repo") == snap

    def test_repo_missing(self, tmp_path):
        session = FakeSession()
        session.add("/repos/owner/repo", FakeResponse(status=404))
        with pytest.raises(RepoNotFoundError):
            fetch_forge("owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session))

    def test_rate_limit_honored_then_success(self, tmp_path):
        session = make_session()
        limited = FakeResponse(
            status=403,
            headers={"X-RateLimit-Remaining": "0", "Retry-After": "7"},
        )
        # Queue the limited response ahead of the normal metadata response.
        session.routes[("/repos/owner/repo", 1)].insert(0, limited)
        sleeps = []
        client = ForgeClient(token="t", session=session, sleep=sleeps.append)
        snap = fetch_forge("owner/repo", tmp_path / "repo", clock=CLOCK, client=client)
        assert snap.metadata.stars == 42
        assert sleeps == [7.0]

    def test_rate_limit_exhausted_reports_quota(self, tmp_path):
        session = FakeSession()
        limited = FakeResponse(
            status=403,
            headers={"X-RateLimit-Remaining": "0", "Retry-After": "1"},
        )
        session.add("/repos/owner/repo", limited)
        client = ForgeClient(
            token="t", session=session, sleep=lambda s: None, rate_limit_retries=2
        )
        with pytest.raises(RateLimitExhaustedError, match="remaining quota: 0"):
            fetch_forge("owner/repo", tmp_path / "repo", clock=CLOCK, client=client)
        limit_calls = [c for c in session.calls if c[0] == "/repos/owner/repo"]
        assert len(limit_calls) == 3  # initial + two honored retries

    def test_partial_pagination_is_atomic(self, tmp_path):
        pulls = [pull_item(n, "2025-01-01T00:00:00Z") for n in range(1, 101)]
        session = make_session(pulls=pulls)
        # Page 2 of pulls is missing -> FakeSession returns HTTP 500.
        del session.routes[("/repos/owner/repo/pulls", 2)]
        target = tmp_path / "repo"
        with pytest.raises(ForgeError):
            fetch_forge("owner/repo", target, clock=CLOCK, client=client_for(session))
        assert not target.exists()
        assert list(tmp_path.iterdir()) == []

    def test_failure_leaves_existing_snapshot_untouched(self, tmp_path):
        target = tmp_path / "repo"
        session = make_session()
        fetch_forge("owner/repo", target, clock=CLOCK, client=client_for(session))
        before = (target / "metadata.json").read_text()

        bad = FakeSession()
        bad.add("/repos/owner/repo", FakeResponse(status=500))
        with pytest.raises(ForgeError):
            fetch_forge("owner/repo", target, clock=CLOCK, client=client_for(bad))
        assert (target / "metadata.json").read_text() == before

    def test_auth_header_sent_but_never_written(self, tmp_path):
        session = make_session()
        fetch_forge("owner/repo", tmp_path / "repo", clock=CLOCK, client=client_for(session))
        assert all(
            call[3].get("Authorization") == "Bearer secret" for call in session.calls
        )
        for file in (tmp_path / "repo").iterdir():
            assert "secret" not in file.read_text()

    def test_concurrent_pagination_with_link_header(self, tmp_path):
        pulls = [pull_item(n, "2025-01-01T00:00:00Z") for n in range(1, 121)]
        session = make_session(pulls=pulls, page_size=50)
        first = session.routes[("/repos/owner/repo/pulls", 1)][0]
        first.headers["Link"] = (
            '<https://api.github.com/repos/owner/repo/pulls?page=3>; rel="last"'
        )
        client = ForgeClient(
            token="t", session=session, sleep=lambda s: None, page_size=50, concurrency=3
        )
        snap = fetch_forge("owner/repo", tmp_path / "repo", clock=CLOCK, client=client)
        assert len(snap.pull_requests) == 120
        assert [p.id for p in snap.pull_requests] == [str(n) for n in range(1, 121)]


class TestClockSemantics:
    def test_events_after_clock_are_invisible(self):
        commits = [
            commit_item("aaa", "2025-06-29T00:00:00Z"),
            commit_item("bbb", "2025-07-01T00:00:00Z"),
        ]
        pulls = [
            pull_item(1, "2025-06-01T00:00:00Z", closed="2025-07-02T00:00:00Z"),
            pull_item(2, "2025-07-01T00:00:00Z"),
        ]
        snap = build_snapshot("pkg", dict(META_BODY), commits, pulls, clock=CLOCK)
        assert [c.id for c in snap.commits] == ["aaa"]
        assert [p.id for p in snap.pull_requests] == ["1"]
        # Closure happened after the clock: still open as of the snapshot.
        assert snap.pull_requests[0].closed_at is None

    def test_exclude_bots(self):
        pulls = [
            pull_item(1, "2025-01-01T00:00:00Z"),
            pull_item(2, "2025-01-01T00:00:00Z", user_type="Bot"),
        ]
        snap = build_snapshot("pkg", dict(META_BODY), [], pulls, clock=CLOCK, exclude_bots=True)
        assert [p.id for p in snap.pull_requests] == ["1"]

    def test_watchers_prefers_subscribers(self):
        snap = build_snapshot("pkg", dict(META_BODY), [], [], clock=CLOCK)
        assert snap.metadata.watchers == 11

    def test_watchers_falls_back_to_legacy(self):
        meta = dict(META_BODY)
        del meta["subscribers_count"]
        snap = build_snapshot("pkg", meta, [], [], clock=CLOCK)
        assert snap.metadata.watchers == 42
