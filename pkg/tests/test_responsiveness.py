from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from malta.model import MaltaConfig, PullRequestRecord
from malta.responsiveness import PrPartition, compute_mrs, partition_prs
from synth import default_windows, pr, utc


class TestPartition:
    def test_merged_in_window_is_terminal(self, windows):
        record = pr(
            "1",
            windows.eval_start + timedelta(days=10),
            merged=windows.eval_start + timedelta(days=12),
        )
        part = partition_prs([record], windows)
        assert part.terminal == (record,)
        assert part.open == ()

    def test_closed_after_window_counts_open(self, windows):
        record = pr(
            "1",
            windows.eval_start + timedelta(days=10),
            closed=windows.eval_end + timedelta(days=1),
        )
        part = partition_prs([record], windows)
        assert part.open == (record,)
        assert part.terminal == ()

    def test_created_before_window_excluded(self, windows):
        record = pr(
            "1",
            windows.eval_start - timedelta(days=1),
            merged=windows.eval_start + timedelta(days=5),
        )
        part = partition_prs([record], windows)
        assert part.terminal == () and part.open == ()

    def test_created_at_window_end_excluded(self, windows):
        part = partition_prs([pr("1", windows.eval_end)], windows)
        assert part.terminal == () and part.open == ()

    def test_malformed_terminal_timestamp_rejected(self):
        with pytest.raises(ValueError, match="precedes created_at"):
            PullRequestRecord(
                id="1", created_at=utc(2024, 5, 1), merged_at=utc(2024, 4, 1)
            )


class TestComputeMrs:
    def test_no_prs_is_undefined(self, windows, cfg):
        assert compute_mrs(PrPartition((), ()), windows, cfg) is None

    def test_all_open_scores_zero(self, windows, cfg):
        prs = [
            pr(str(i), windows.eval_start + timedelta(days=30 * i)) for i in range(3)
        ]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.s_resp == 0.0
        assert result.r_dec == 0.0
        assert result.d_dec is None

    def test_worked_example(self, windows, cfg):
        """2 terminal (18d, 90d) and 2 open (90d, 180d old) -> 0.0875."""
        t0 = windows.eval_start
        prs = [
            pr("t1", t0, merged=t0 + timedelta(days=18)),
            pr("t2", t0, closed=t0 + timedelta(days=90)),
            pr("o1", windows.eval_end - timedelta(days=90)),
            pr("o2", windows.eval_end - timedelta(days=180)),
        ]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.r_dec == 0.5
        assert result.d_dec == pytest.approx(0.3, abs=1e-12)
        assert result.p_stale == pytest.approx(0.75, abs=1e-12)
        assert result.s_resp == pytest.approx(0.0875, abs=1e-12)

    def test_instant_decisions_score_one(self, windows, cfg):
        prs = [
            pr(str(i), windows.eval_start + timedelta(days=i), merged=windows.eval_start + timedelta(days=i))
            for i in range(4)
        ]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.s_resp == 1.0
        assert result.d_dec == 0.0
        assert result.p_stale == 0.0

    def test_even_median_averages_middles(self, windows, cfg):
        t0 = windows.eval_start
        prs = [
            pr("a", t0, merged=t0 + timedelta(days=18)),
            pr("b", t0, merged=t0 + timedelta(days=90)),
        ]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.d_dec == pytest.approx((0.1 + 0.5) / 2, abs=1e-15)

    def test_delays_in_fractional_days(self, windows, cfg):
        t0 = windows.eval_start
        prs = [pr("a", t0, merged=t0 + timedelta(hours=36))]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.d_dec == pytest.approx(1.5 / 180.0, abs=1e-15)

    def test_delay_saturates_at_t_ref(self, windows):
        cfg = MaltaConfig(t_ref_days=30.0)
        t0 = windows.eval_start
        prs = [pr("a", t0, closed=t0 + timedelta(days=200))]
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result.d_dec == 1.0
        assert result.s_resp == 0.0

    def test_merged_timestamp_preferred_for_delay(self, windows, cfg):
        t0 = windows.eval_start
        record = pr("a", t0, closed=t0 + timedelta(days=40), merged=t0 + timedelta(days=20))
        result = compute_mrs(partition_prs([record], windows), windows, cfg)
        assert result.d_dec == pytest.approx(20 / 180.0, abs=1e-15)

    def test_bounds_and_window_cap_invariant(self, windows, cfg):
        """All delays and ages of window PRs are bounded by the window span."""
        import numpy as np

        rng = np.random.default_rng(7)
        t0, span = windows.eval_start, windows.eval_days
        prs = []
        for i in range(50):
            created = t0 + timedelta(days=float(rng.uniform(0, span - 0.01)))
            if rng.random() < 0.5:
                remaining = (windows.eval_end - created).total_seconds() / 86400
                decided = created + timedelta(days=float(rng.uniform(0, remaining * 0.99)))
                prs.append(pr(str(i), created, closed=decided))
            else:
                prs.append(pr(str(i), created))
        part = partition_prs(prs, windows)
        for record in part.terminal:
            delta = (record.terminal_at - record.created_at).total_seconds() / 86400
            assert delta <= windows.eval_days
        for record in part.open:
            age = (windows.eval_end - record.created_at).total_seconds() / 86400
            assert age <= windows.eval_days
        result = compute_mrs(part, windows, cfg)
        if result is not None:
            assert 0.0 <= result.s_resp <= 1.0

    def test_staleness_monotonicity(self, windows, cfg):
        """Aging one open PR (earlier creation) never raises the score."""
        t0 = windows.eval_start
        decided = [pr("t", t0, merged=t0 + timedelta(days=10))]
        scores = []
        for age in (10, 60, 120, 179):
            open_pr = pr("o", windows.eval_end - timedelta(days=age))
            part = partition_prs(decided + [open_pr], windows)
            scores.append(compute_mrs(part, windows, cfg).s_resp)
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    @given(
        st.lists(
            st.tuples(
                st.floats(min_value=0.0, max_value=547.9),
                st.one_of(st.none(), st.floats(min_value=0.0, max_value=1.0)),
            ),
            min_size=1,
            max_size=30,
        )
    )
    def test_score_in_unit_interval(self, spec_list):
        windows = default_windows()
        cfg = MaltaConfig()
        prs = []
        for i, (created_offset, decided_frac) in enumerate(spec_list):
            created = windows.eval_start + timedelta(days=created_offset)
            if decided_frac is None:
                prs.append(pr(str(i), created))
            else:
                remaining = (windows.eval_end - created).total_seconds() / 86400
                decided = created + timedelta(days=decided_frac * remaining * 0.999)
                prs.append(pr(str(i), created, closed=decided))
        result = compute_mrs(partition_prs(prs, windows), windows, cfg)
        assert result is not None
        assert 0.0 <= result.s_resp <= 1.0
