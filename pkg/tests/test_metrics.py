import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from giftworld.errors import ContractViolation, DomainError
from giftworld.metrics import (GiftStats, equality, gift_weight_mean,
                               schelling_diagram, verify_ssd)


class TestEquality:
    def test_equal_returns(self):
        assert equality([1.0, 1.0, 1.0, 1.0]) == pytest.approx(1.0)

    def test_single_earner(self):
        # pairwise |diff| sum = 6R against denominator 2*4*R = 8R -> E = 0.25
        for r in (1.0, 5.0, 123.4):
            assert equality([r, 0.0, 0.0, 0.0]) == pytest.approx(0.25)

    def test_zero_total_rejected(self):
        with pytest.raises(DomainError):
            equality([0.0, 0.0])
        with pytest.raises(DomainError):
            equality([1.0, -1.0])

    @given(arrays(np.float64, 4, elements=st.floats(0.0, 100.0)))
    @settings(max_examples=300)
    def test_bounds_for_nonnegative_rewards(self, r):
        if r.sum() <= 0:
            return
        e = equality(r)
        assert 0.0 <= e <= 1.0

    @given(r=arrays(np.float64, 5, elements=st.floats(0.01, 100.0)),
           perm=st.permutations(range(5)))
    @settings(max_examples=100)
    def test_permutation_invariance(self, r, perm):
        assert equality(r[list(perm)]) == pytest.approx(equality(r))


class TestGiftWeightMean:
    def test_identity_matrices_give_zero(self):
        series = np.tile(np.eye(3), (10, 1, 1))
        stats = gift_weight_mean(series, window=5)
        assert stats == GiftStats(mean=0.0, std=0.0, window=5)

    def test_constant_off_diagonal(self):
        w = np.full((4, 4), 0.2)
        np.fill_diagonal(w, 0.4)
        series = np.tile(w, (8, 1, 1))
        stats = gift_weight_mean(series, window=8)
        assert stats.mean == pytest.approx(0.2)
        assert stats.std == pytest.approx(0.0)

    def test_window_restricts_episodes(self):
        a = np.tile(np.eye(2), (5, 1, 1))
        b = np.tile(np.array([[0.5, 0.5], [0.5, 0.5]]), (5, 1, 1))
        series = np.concatenate([a, b])
        assert gift_weight_mean(series, window=5).mean == pytest.approx(0.5)
        assert gift_weight_mean(series, window=10).mean == pytest.approx(0.25)

    def test_window_too_long(self):
        with pytest.raises(ContractViolation):
            gift_weight_mean(np.tile(np.eye(2), (3, 1, 1)), window=4)


class TestSchelling:
    def test_ssh_full_cooperation_point(self):
        curve = schelling_diagram("ssh", episodes_per_point=20, seed=0)
        assert curve.rc[4] == pytest.approx(5.0)  # two stags split by two pairs
        assert np.isnan(curve.rc[0]) and np.isnan(curve.rd[4])

    def test_ssg_all_defect_point(self):
        curve = schelling_diagram("ssg", episodes_per_point=5, seed=0)
        assert curve.rd[0] == 0.0  # waiters never remove anything

    def test_cleanup_all_defect_point(self):
        curve = schelling_diagram("cleanup", episodes_per_point=5, seed=0)
        assert curve.rd[0] == pytest.approx(0.0, abs=1e-9)

    def test_expected_flags_per_environment(self):
        expected = {"ssh": (True, False), "ssg": (False, True),
                    "cleanup": (False, True), "coingame": (True, True)}
        for kind, (fear, greed) in expected.items():
            report = verify_ssd(schelling_diagram(kind, episodes_per_point=40, seed=3))
            assert report.fear == fear, kind
            assert report.greed == greed, kind
            assert report.mutual_cooperation_beats_defection, kind
            assert report.cooperation_beats_exploitation, kind

    def test_estimator_consistency_by_bootstrap(self):
        # doubling the episode budget shrinks the bootstrap SE; subsampling
        # one run isolates the 1/sqrt(n) effect from layout luck
        rng = np.random.default_rng(0)

        def bootstrap_se(samples, k=300):
            means = [rng.choice(samples, size=len(samples), replace=True).mean()
                     for _ in range(k)]
            return np.std(means)

        curve = schelling_diagram("coingame", episodes_per_point=80, seed=1)
        total_small, total_big = 0.0, 0.0
        for samples in list(curve.rc_samples) + list(curve.rd_samples):
            if samples is None:
                continue
            total_small += bootstrap_se(samples[:40])
            total_big += bootstrap_se(samples)
        assert total_big < total_small
