import numpy as np
import pytest
from hypothesis import given, strategies as st

from shoresim.reward import RewardConfig, compute_reward, compute_reward_arrays

CFG = RewardConfig()


class TestExactCases:
    def test_both_targets_met(self):
        terms = compute_reward(10.0, 1.0, CFG)
        assert terms.speed_reward == 1.0
        assert terms.distance_reward == 1.0
        assert terms.total == 3.75

    def test_distance_floor_engages(self):
        terms = compute_reward(20.0, 1.0, CFG)
        assert terms.distance_reward == -20.0
        assert terms.total == 1.25 * 1.0 + 2.5 * -20.0

    def test_reverse_penalty(self):
        terms = compute_reward(10.0, -0.2, CFG)
        assert terms.speed_reward == -0.625
        assert terms.total == 1.25 * -0.625 + 2.5 * 1.0
        assert terms.total == pytest.approx(1.71875)

    def test_weights_compose_exactly(self):
        terms = compute_reward(12.5, 0.4, CFG)
        assert terms.total == 1.25 * terms.speed_reward + 2.5 * terms.distance_reward

    def test_negative_distance_rejected(self):
        with pytest.raises(ValueError):
            compute_reward(-1.0, 0.5, CFG)


class TestShape:
    @given(st.floats(0.0, 60.0), st.floats(0.0, 60.0), st.floats(-2.0, 2.5))
    def test_distance_term_monotone_in_error(self, d1, d2, u):
        near, far = sorted((d1, d2), key=lambda d: abs(d - 10.0))
        assert compute_reward(near, u, CFG).distance_reward >= compute_reward(far, u, CFG).distance_reward

    @given(st.floats(0.0, 2.5), st.floats(0.0, 2.5))
    def test_speed_term_monotone_forward(self, u1, u2):
        near, far = sorted((u1, u2), key=lambda u: abs(u - 1.0))
        assert compute_reward(10.0, near, CFG).speed_reward >= compute_reward(10.0, far, CFG).speed_reward

    @given(st.floats(0.0, 60.0), st.floats(-2.0, 2.5))
    def test_unique_maximum_at_the_targets(self, d, u):
        assert compute_reward(d, u, CFG).total <= 3.75
        if abs(d - 10.0) > 1e-6 or abs(u - 1.0) > 1e-6:
            assert compute_reward(d, u, CFG).total < 3.75

    @given(st.floats(0.0, 60.0), st.floats(-3.0, 2.5))
    def test_term_ranges(self, d, u):
        terms = compute_reward(d, u, CFG)
        assert -20.0 <= terms.distance_reward <= 1.0
        assert -0.625 <= terms.speed_reward <= 1.0

    def test_pure(self):
        assert compute_reward(7.3, 0.9, CFG) == compute_reward(7.3, 0.9, CFG)


class TestQuadraticVariant:
    def test_quadratic_speed_term(self):
        cfg = RewardConfig(speed_term="quadratic")
        terms = compute_reward(10.0, 0.5, cfg)
        assert terms.speed_reward == pytest.approx((1.0 - 0.25) / 1.0)
        assert compute_reward(10.0, 1.0, cfg).total == 3.75
        assert compute_reward(10.0, -0.5, cfg).speed_reward == -0.625

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            RewardConfig(speed_term="cubic")


class TestVectorized:
    def test_matches_scalar(self):
        rng = np.random.default_rng(0)
        d = rng.uniform(0, 40, 500)
        u = rng.uniform(-1.5, 2.5, 500)
        batch = compute_reward_arrays(d, u, CFG)
        scalar = np.array([compute_reward(di, ui, CFG).total for di, ui in zip(d, u)])
        assert np.array_equal(batch, scalar)
