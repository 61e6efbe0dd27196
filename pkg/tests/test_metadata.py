import math

import pytest
from hypothesis import given, strategies as st

from malta.metadata import (
    SaturationConstants,
    compute_rmvs,
    log_saturate,
    saturation_constants,
)
from malta.model import MaltaConfig, RepoMetadata


def percentile_oracle(values, q=0.95):
    """Independent closest-rank linear interpolation."""
    ordered = sorted(values)
    position = (len(ordered) - 1) * q
    lower = math.floor(position)
    fraction = position - lower
    if lower + 1 >= len(ordered):
        return float(ordered[-1])
    return ordered[lower] + fraction * (ordered[lower + 1] - ordered[lower])


class TestSaturationConstants:
    def test_constant_distribution(self):
        dataset = [RepoMetadata(stars=7) for _ in range(20)]
        assert saturation_constants(dataset).k_stars == 7.0

    def test_linear_interpolation(self):
        dataset = [RepoMetadata(stars=s) for s in range(1, 101)]
        expected = percentile_oracle(range(1, 101))
        assert saturation_constants(dataset).k_stars == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(95.05)

    def test_single_repo(self):
        constants = saturation_constants(
            [RepoMetadata(stars=3, forks=4, watchers=5, open_issues=6)]
        )
        assert (constants.k_stars, constants.k_forks) == (3.0, 4.0)
        assert (constants.k_watchers, constants.k_open_issues) == (5.0, 6.0)

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            saturation_constants([])

    @given(st.lists(st.integers(0, 100_000), min_size=1, max_size=200))
    def test_matches_oracle(self, stars):
        dataset = [RepoMetadata(stars=s) for s in stars]
        assert saturation_constants(dataset).k_stars == pytest.approx(
            percentile_oracle(stars), rel=1e-12, abs=1e-12
        )

    def test_dict_round_trip(self):
        constants = SaturationConstants(1.0, 2.0, 3.0, 4.0)
        assert SaturationConstants.from_dict(constants.to_dict()) == constants


class TestLogSaturate:
    @pytest.mark.parametrize("k", [1.0, 17.0, 9999.0])
    def test_zero_maps_to_zero(self, k):
        assert log_saturate(0, k) == 0.0

    @pytest.mark.parametrize("k", [1.0, 17.0, 9999.0])
    def test_cap_maps_to_one(self, k):
        assert log_saturate(k, k) == 1.0

    def test_exact_half(self):
        assert log_saturate(9, 99) == 0.5

    def test_above_cap_saturates(self):
        assert log_saturate(10_000, 99) == 1.0

    def test_degenerate_cap(self):
        assert log_saturate(0, 0) == 0.0
        assert log_saturate(5, 0) == 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            log_saturate(-1, 10)
        with pytest.raises(ValueError):
            log_saturate(1, -10)

    @given(st.floats(0, 1e9), st.floats(0, 1e9))
    def test_bounded(self, x, k):
        assert 0.0 <= log_saturate(x, k) <= 1.0


CONSTANTS = SaturationConstants(
    k_stars=1000.0, k_forks=200.0, k_watchers=100.0, k_open_issues=50.0
)


class TestComputeRmvs:
    def test_archived_factor(self, cfg):
        meta = RepoMetadata(stars=1000, forks=200, watchers=100, open_issues=0, archived=True)
        score = compute_rmvs(meta, CONSTANTS, cfg)
        assert score == pytest.approx(0.3, abs=1e-12)
        assert round(score, 3) == 0.300

    def test_all_components_at_cap(self, cfg):
        meta = RepoMetadata(stars=1000, forks=200, watchers=100, open_issues=0)
        assert compute_rmvs(meta, CONSTANTS, cfg) == 1.0

    def test_penalty_disabled_ignores_archival(self):
        cfg = MaltaConfig(apply_archival_penalty=False)
        archived = RepoMetadata(stars=40, forks=3, watchers=9, open_issues=7, archived=True)
        live = RepoMetadata(stars=40, forks=3, watchers=9, open_issues=7, archived=False)
        assert compute_rmvs(archived, CONSTANTS, cfg) == compute_rmvs(live, CONSTANTS, cfg)

    def test_archived_capped_at_penalty(self, cfg):
        meta = RepoMetadata(stars=999999, forks=99999, watchers=9999, open_issues=0, archived=True)
        assert compute_rmvs(meta, CONSTANTS, cfg) <= 0.3 + 1e-12

    def test_issue_backlog_penalizes(self, cfg):
        clean = RepoMetadata(stars=100, forks=10, watchers=10, open_issues=0)
        buried = RepoMetadata(stars=100, forks=10, watchers=10, open_issues=500)
        assert compute_rmvs(buried, CONSTANTS, cfg) < compute_rmvs(clean, CONSTANTS, cfg)

    def test_popularity_increases_score(self, cfg):
        small = RepoMetadata(stars=5, forks=1, watchers=1, open_issues=3)
        big = RepoMetadata(stars=500, forks=50, watchers=40, open_issues=3)
        assert compute_rmvs(big, CONSTANTS, cfg) > compute_rmvs(small, CONSTANTS, cfg)

    def test_saturation_discards_outlier_rank(self, cfg):
        at_cap = RepoMetadata(stars=1000, forks=1, watchers=1, open_issues=1)
        beyond = RepoMetadata(stars=50_000, forks=1, watchers=1, open_issues=1)
        assert compute_rmvs(at_cap, CONSTANTS, cfg) == compute_rmvs(beyond, CONSTANTS, cfg)

    @given(
        st.integers(0, 10**6),
        st.integers(0, 10**5),
        st.integers(0, 10**5),
        st.integers(0, 10**4),
        st.booleans(),
    )
    def test_bounded(self, stars, forks, watchers, issues, archived):
        cfg = MaltaConfig()
        meta = RepoMetadata(
            stars=stars, forks=forks, watchers=watchers, open_issues=issues, archived=archived
        )
        score = compute_rmvs(meta, CONSTANTS, cfg)
        assert 0.0 <= score <= 1.0
        if archived:
            assert score <= 0.3 + 1e-12
