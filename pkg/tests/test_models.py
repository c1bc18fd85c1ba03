import math

import numpy as np
import pytest
from pydantic import ValidationError

from risk_corners.errors import ArgumentError, DomainError, RangeError
from risk_corners.models import (
    HybridProject,
    Ordering,
    ProbabilityModel,
    RewardFunction,
    RewardModel,
    hybrid_lottery,
    hybrid_reward,
    prob_eu,
    prob_eu_cara_derivatives,
    prob_eu_grid,
    reward_eu,
    reward_eu_derivatives,
    sosd_prefer_probability,
)
from risk_corners.utility import CARA, CRRA, Linear


class TestProbabilityModel:
    def test_expected_utility_at_p_bar(self, prob_model):
        expected = 0.8 * -math.exp(-1.2) + 0.2 * -math.exp(0.8)
        assert prob_eu(prob_model, CARA(lam=1.0), 0.8) == pytest.approx(expected, rel=1e-12)
        assert prob_eu(prob_model, CARA(lam=1.0), 0.8) == pytest.approx(-0.6861, abs=1e-4)

    def test_linear_is_expected_wealth(self, prob_model):
        p = np.linspace(0.0, 0.8, 9)
        np.testing.assert_allclose(prob_eu(prob_model, Linear(), p), p * 2.0 - p)

    def test_derivative_at_zero(self, prob_model):
        d1, _ = prob_eu_cara_derivatives(prob_model, 1.0, 0.0)
        assert float(d1) == pytest.approx(-math.exp(-2.0), rel=1e-12)
        assert float(d1) == pytest.approx(-0.1353, abs=1e-4)

    @pytest.mark.parametrize("lam", [0.05, 1.0, 3.0])
    def test_derivatives_match_finite_differences(self, log_model, lam):
        pref = CARA(lam=lam)
        p = np.linspace(0.05, 0.75, 8)
        h = 1e-6
        d1, d2 = prob_eu_cara_derivatives(log_model, lam, p)
        fd1 = (prob_eu(log_model, pref, p + h) - prob_eu(log_model, pref, p - h)) / (2 * h)
        d1_up, _ = prob_eu_cara_derivatives(log_model, lam, p + h)
        d1_down, _ = prob_eu_cara_derivatives(log_model, lam, p - h)
        np.testing.assert_allclose(d1, fd1, rtol=1e-5, atol=1e-9)
        np.testing.assert_allclose(d2, (d1_up - d1_down) / (2 * h), rtol=1e-5, atol=1e-9)

    def test_normalized_derivative_tends_to_the_linear_slope(self, prob_model):
        d1, _ = prob_eu_cara_derivatives(prob_model, 1e-9, 0.3, normalized=True)
        assert float(d1) == pytest.approx((2.0 - 0.0) - 1.0, abs=1e-6)

    def test_slope_turns_from_negative_to_positive_at_most_once(self, log_model):
        p = np.linspace(0.0, 0.8, 401)
        for lam in (0.1, 1.0, 10.0):
            d1, _ = prob_eu_cara_derivatives(log_model, lam, p)
            signs = np.sign(d1[d1 != 0.0])
            assert np.count_nonzero(np.diff(signs)) <= 1
            assert np.all(np.diff(signs) >= 0.0)

    def test_cara_choices_ignore_wealth(self, prob_model):
        lam = 0.7
        p = np.linspace(0.0, 0.8, 17)
        rich = prob_model.with_wealth(3.0)
        np.testing.assert_allclose(
            prob_eu(rich, CARA(lam=lam), p),
            math.exp(-3.0 * lam) * prob_eu(prob_model, CARA(lam=lam), p),
            rtol=1e-12,
        )

    def test_p_outside_range(self, prob_model):
        with pytest.raises(RangeError):
            prob_eu(prob_model, Linear(), 0.81)
        with pytest.raises(RangeError):
            prob_eu(prob_model, Linear(), np.array([0.1, -0.01]))

    def test_crra_needs_positive_consumption(self, prob_model):
        with pytest.raises(DomainError):
            prob_eu(prob_model, CRRA(sigma=2.0), 0.5)

    def test_crra_feasible_upper_is_clipped(self, log_model):
        upper = log_model.feasible_upper(CRRA(sigma=1.0))
        assert upper == pytest.approx((1.5 + 0.6875 - 1.5e-9) / 3.0, rel=1e-12)
        assert log_model.feasible_upper(CARA(lam=1.0)) == 0.8

    def test_grid_spans_feasible_range(self, log_model):
        grid, values = prob_eu_grid(log_model, CRRA(sigma=1.0), 101)
        assert grid.size == values.size == 101
        assert grid[0] == 0.0
        assert grid[-1] == pytest.approx(log_model.feasible_upper(CRRA(sigma=1.0)))
        assert np.all(np.isfinite(values))

    def test_lottery(self, prob_model):
        lot = prob_model.lottery(0.5)
        assert (lot.p_win, lot.w_win, lot.w_lose) == pytest.approx((0.5, 1.5, -0.5))

    @pytest.mark.parametrize(
        "params",
        [
            {"H": 1.0, "L": 1.0, "alpha": 0.5, "p_bar": 0.5},
            {"H": 2.0, "L": 0.0, "alpha": 2.0, "p_bar": 0.5},
            {"H": 2.0, "L": 0.0, "alpha": 1.0, "p_bar": 1.0},
            {"H": 2.0, "L": 0.0, "alpha": 1.0, "p_bar": 0.5, "B": -1.0},
        ],
    )
    def test_invalid_parameters(self, params):
        with pytest.raises(ValidationError):
            ProbabilityModel(**params)


class TestRewardModel:
    def test_values_at_game_amounts(self, experiment_reward_model):
        pref = CARA(lam=0.005)
        v30, v60, v90 = (float(reward_eu(experiment_reward_model, pref, c)) for c in (30, 60, 90))
        assert v60 == pytest.approx(-0.4484, abs=1e-4)
        assert v30 == pytest.approx(-0.4494, abs=1e-4)
        assert v90 == pytest.approx(-0.4664, abs=1e-4)
        assert v60 > v30 > v90

    def test_derivatives_match_finite_differences(self, experiment_reward_model):
        pref = CARA(lam=0.005)
        c = np.linspace(5.0, 145.0, 8)
        h = 1e-4
        d1, d2 = reward_eu_derivatives(experiment_reward_model, pref, c)
        v = lambda x: reward_eu(experiment_reward_model, pref, x)  # noqa: E731
        np.testing.assert_allclose(d1, (v(c + h) - v(c - h)) / (2 * h), rtol=1e-6)
        d1_up, _ = reward_eu_derivatives(experiment_reward_model, pref, c + h)
        d1_down, _ = reward_eu_derivatives(experiment_reward_model, pref, c - h)
        np.testing.assert_allclose(d2, (d1_up - d1_down) / (2 * h), rtol=1e-5)

    def test_power_reward_derivatives(self):
        model = RewardModel(
            B=10.0,
            L=0.5,
            p=0.4,
            reward=RewardFunction(kind="power", h0=1.0, m=4.0, theta=0.5, c_max=5.0),
        )
        pref = CRRA(sigma=2.0)
        c = np.linspace(0.5, 4.5, 5)
        d1, d2 = reward_eu_derivatives(model, pref, c)
        h = 1e-5
        v = lambda x: reward_eu(model, pref, x)  # noqa: E731
        np.testing.assert_allclose(d1, (v(c + h) - v(c - h)) / (2 * h), rtol=1e-6)
        assert np.all(d2 < 0.0)

    def test_reward_function(self):
        affine = RewardFunction(kind="affine", h0=2.0, m=3.0, c_max=10.0)
        assert float(affine.value(4.0)) == 14.0
        assert float(affine.slope(4.0)) == 3.0
        power = RewardFunction(kind="power", h0=0.0, m=2.0, theta=0.5, c_max=10.0)
        assert float(power.value(4.0)) == pytest.approx(4.0)
        assert float(power.slope(4.0)) == pytest.approx(0.5)
        assert float(power.curvature(4.0)) == pytest.approx(-0.0625)

    def test_affine_rejects_theta(self):
        with pytest.raises(ValidationError):
            RewardFunction(kind="affine", m=1.0, theta=0.5, c_max=1.0)

    def test_reward_must_exceed_failure(self):
        with pytest.raises(ValidationError):
            RewardModel(L=5.0, p=0.5, reward=RewardFunction(h0=1.0, m=1.0, c_max=1.0))

    def test_c_outside_range(self, experiment_reward_model):
        with pytest.raises(RangeError):
            reward_eu(experiment_reward_model, Linear(), 151.0)


class TestHybridProject:
    @pytest.fixture
    def project(self):
        return HybridProject(C=150.0, L=0.0, p0=1 / 6, p_bar=5 / 6)

    def test_reward_examples(self, project):
        assert float(hybrid_reward(project, 0.5)) == pytest.approx(300.0)
        assert float(hybrid_reward(project, 0.25)) == pytest.approx(600.0)
        assert float(hybrid_reward(project, 0.625)) == pytest.approx(240.0)

    def test_mean_is_preserved(self):
        project = HybridProject(C=10.0, L=2.0, p0=0.1, p_bar=0.9)
        for p in np.linspace(0.1, 0.9, 9):
            lot = hybrid_lottery(project, float(p))
            assert lot.mean == pytest.approx(10.0)

    def test_reward_decreases_in_p(self, project):
        p = np.linspace(1 / 6, 5 / 6, 25)
        assert np.all(np.diff(hybrid_reward(project, p)) < 0.0)

    def test_out_of_range(self, project):
        with pytest.raises(RangeError):
            hybrid_reward(project, 0.1)

    def test_sqrt_utility_prefers_probability(self, project):
        comparison = sosd_prefer_probability(project, CRRA(sigma=0.5), 0.5, 0.25, base_wealth=1e-6)
        assert comparison.ordering is Ordering.PROBABILITY
        # u = 2 (sqrt(x) - 1), so (eu + 2) / 2 is the expected square root
        assert (comparison.eu_probability + 2.0) / 2.0 == pytest.approx(8.66, abs=1e-2)
        assert (comparison.eu_reward + 2.0) / 2.0 == pytest.approx(6.12, abs=1e-2)

    def test_cara_prefers_probability(self, project):
        comparison = sosd_prefer_probability(project, CARA(lam=0.01), 0.5, 0.25)
        assert comparison.ordering is Ordering.PROBABILITY
        assert comparison.normalized_difference > 0.0

    def test_linear_is_indifferent(self, project):
        comparison = sosd_prefer_probability(project, Linear(), 0.5, 0.25)
        assert comparison.ordering is Ordering.INDIFFERENT

    def test_every_concave_agent_prefers_the_safer_lottery(self, project):
        pairs = [(0.8, 0.2), (0.6, 0.5), (0.3, 0.2)]
        for pref in (CARA(lam=0.001), CARA(lam=0.2), CRRA(sigma=0.3), CRRA(sigma=4.0)):
            for p, p_prime in pairs:
                comparison = sosd_prefer_probability(project, pref, p, p_prime, base_wealth=1.0)
                assert comparison.ordering is Ordering.PROBABILITY

    def test_cara_prefers_the_likelier_of_the_extreme_lotteries(self, project):
        comparison = sosd_prefer_probability(project, CARA(lam=0.01), 0.5, 1 / 6)
        assert comparison.ordering is Ordering.PROBABILITY
        assert comparison.normalized_difference > 0.0

    def test_random_projects(self, rng):
        for _ in range(200):
            C = rng.uniform(1.0, 200.0)
            project = HybridProject(
                C=C,
                L=rng.uniform(0.0, 0.9 * C),
                p0=rng.uniform(0.05, 0.3),
                p_bar=rng.uniform(0.6, 0.95),
            )
            grid = np.linspace(project.p0, project.p_bar, 6)
            prefs = (CARA(lam=rng.uniform(0.1, 3.0) / C), CRRA(sigma=rng.uniform(0.3, 4.0)))
            for i, p_prime in enumerate(grid):
                for p in grid[i + 1 :]:
                    for pref in prefs:
                        comparison = sosd_prefer_probability(
                            project, pref, float(p), float(p_prime), base_wealth=1.0
                        )
                        assert comparison.ordering is Ordering.PROBABILITY
                        assert comparison.normalized_difference > 0.0
                    neutral = sosd_prefer_probability(
                        project, Linear(), float(p), float(p_prime), base_wealth=1.0
                    )
                    assert neutral.ordering is Ordering.INDIFFERENT
                    assert abs(neutral.normalized_difference) <= 1e-12

    def test_needs_ordered_probabilities(self, project):
        with pytest.raises(ArgumentError):
            sosd_prefer_probability(project, Linear(), 0.25, 0.5)
