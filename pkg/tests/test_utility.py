import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from risk_corners.errors import DomainError
from risk_corners.utility import (
    CARA,
    CRRA,
    PREFERENCE_ADAPTER,
    BinaryLottery,
    Linear,
    arrow_pratt,
    certainty_equivalent,
    eval_utility,
    expected_utility,
    is_strictly_concave,
    marginal_utility,
    normalized_utility,
    two_point_eu,
    utility_curvature,
)

lams = st.floats(min_value=1e-3, max_value=5.0)
sigmas = st.floats(min_value=0.1, max_value=5.0)
wealth = st.floats(min_value=0.01, max_value=100.0)


def preferences():
    return st.one_of(
        lams.map(lambda lam: CARA(lam=lam)),
        sigmas.map(lambda sigma: CRRA(sigma=sigma)),
        st.just(Linear()),
    )


class TestEvalUtility:
    def test_known_values(self):
        assert eval_utility(CARA(lam=1.0), 0.0) == pytest.approx(-1.0)
        assert eval_utility(CRRA(sigma=1.0), 1.0) == pytest.approx(0.0)
        assert eval_utility(CARA(lam=2.0), 0.5) == pytest.approx(-math.exp(-1.0), rel=1e-12)

    def test_crra_log_at_one(self):
        x = np.array([0.5, 1.0, 7.0])
        np.testing.assert_allclose(eval_utility(CRRA(sigma=1.0), x), np.log(x))

    def test_crra_rejects_non_positive_wealth(self):
        with pytest.raises(DomainError) as excinfo:
            two_point_eu(CRRA(sigma=2.0), 0.5, 3.0, -1.0)
        assert excinfo.value.argument == "w_lose"

    def test_crra_zero_is_outside_domain(self):
        with pytest.raises(DomainError):
            eval_utility(CRRA(sigma=0.5), 0.0)

    def test_crra_continuous_in_sigma_at_one(self):
        x = np.linspace(0.1, 100.0, 500)
        for sigma in (1.0 - 1e-6, 1.0 + 1e-6):
            assert np.max(np.abs(eval_utility(CRRA(sigma=sigma), x) - np.log(x))) <= 1e-4

    def test_normalized_cara_tends_to_linear(self):
        x = np.linspace(-5.0, 5.0, 11)
        np.testing.assert_allclose(normalized_utility(CARA(lam=1e-10), x), x, atol=1e-8)

    def test_normalized_is_affine_in_raw(self):
        pref = CARA(lam=0.7)
        x = np.linspace(-2.0, 4.0, 13)
        np.testing.assert_allclose(
            normalized_utility(pref, x), (1.0 + eval_utility(pref, x)) / pref.lam, rtol=1e-12
        )

    @given(pref=preferences(), a=wealth, b=wealth)
    def test_increasing(self, pref, a, b):
        lo, hi = sorted((a, b))
        assert eval_utility(pref, hi, normalized=True) >= eval_utility(pref, lo, normalized=True)
        assert marginal_utility(pref, lo) > 0.0

    @given(pref=preferences(), a=wealth, b=wealth)
    def test_weakly_concave(self, pref, a, b):
        mid = eval_utility(pref, 0.5 * (a + b), normalized=True)
        avg = 0.5 * (eval_utility(pref, a, normalized=True) + eval_utility(pref, b, normalized=True))
        assert mid >= avg - 1e-12 * max(1.0, abs(avg))


class TestDerivatives:
    @pytest.mark.parametrize("pref", [CARA(lam=0.8), CRRA(sigma=2.5), CRRA(sigma=1.0), Linear()])
    def test_match_central_differences(self, pref):
        x = np.linspace(0.5, 5.0, 10)
        h = 1e-5
        du = (pref.u(x + h) - pref.u(x - h)) / (2 * h)
        d2u = (pref.du(x + h) - pref.du(x - h)) / (2 * h)
        np.testing.assert_allclose(marginal_utility(pref, x), du, rtol=1e-6, atol=1e-9)
        np.testing.assert_allclose(utility_curvature(pref, x), d2u, rtol=1e-6, atol=1e-9)

    def test_arrow_pratt(self):
        absolute, relative = arrow_pratt(CARA(lam=0.3), 10.0)
        assert (float(absolute), float(relative)) == pytest.approx((0.3, 3.0))
        absolute, relative = arrow_pratt(CRRA(sigma=2.0), 4.0)
        assert (float(absolute), float(relative)) == pytest.approx((0.5, 2.0))
        assert tuple(map(float, arrow_pratt(Linear(), 4.0))) == (0.0, 0.0)

    def test_strict_concavity_flag(self):
        assert is_strictly_concave(CARA(lam=1.0))
        assert is_strictly_concave(CRRA(sigma=0.5))
        assert not is_strictly_concave(Linear())


class TestExpectedUtility:
    def test_linear_is_the_mean(self):
        lot = BinaryLottery(p_win=0.5, w_win=300.0, w_lose=0.0)
        assert expected_utility(Linear(), lot) == pytest.approx(150.0)
        assert lot.mean == pytest.approx(150.0)
        assert lot.variance == pytest.approx(0.25 * 300.0**2)

    def test_degenerate_cara(self):
        lot = BinaryLottery(p_win=1.0, w_win=2.0, w_lose=123.0)
        assert expected_utility(CARA(lam=1.0), lot) == pytest.approx(-math.exp(-2.0))

    def test_sqrt_utility_by_two_term_sum(self):
        eps = 1e-6
        lot = BinaryLottery(p_win=0.25, w_win=600.0, w_lose=eps)
        expected = 0.25 * 2 * (math.sqrt(600.0) - 1) + 0.75 * 2 * (math.sqrt(eps) - 1)
        assert expected_utility(CRRA(sigma=0.5), lot) == pytest.approx(expected, rel=1e-12)

    def test_vectorized_over_probabilities(self):
        p = np.linspace(0.0, 1.0, 5)
        values = two_point_eu(Linear(), p, 10.0, 2.0)
        np.testing.assert_allclose(values, 2.0 + 8.0 * p)

    def test_unordered_outcomes_allowed(self):
        lot = BinaryLottery(p_win=0.3, w_win=1.0, w_lose=5.0)
        assert lot.mean == pytest.approx(3.8)

    def test_probability_must_be_a_probability(self):
        with pytest.raises(ValidationError):
            BinaryLottery(p_win=1.5, w_win=1.0, w_lose=0.0)

    def test_affine_transform_keeps_the_ranking(self):
        pref = CRRA(sigma=3.0)
        a = BinaryLottery(p_win=0.4, w_win=9.0, w_lose=2.0)
        b = BinaryLottery(p_win=0.9, w_win=5.0, w_lose=1.0)
        raw = expected_utility(pref, a) > expected_utility(pref, b)

        def transformed(lot):
            return 3.0 * expected_utility(pref, lot) + 11.0

        assert raw == (transformed(a) > transformed(b))


class TestCertaintyEquivalent:
    def test_linear(self):
        lot = BinaryLottery(p_win=0.5, w_win=300.0, w_lose=0.0)
        assert certainty_equivalent(Linear(), lot) == pytest.approx(150.0)

    def test_cara_degenerate(self):
        lot = BinaryLottery(p_win=1.0, w_win=4.2, w_lose=-3.0)
        assert certainty_equivalent(CARA(lam=2.0), lot) == pytest.approx(4.2)

    def test_cara_closed_form(self):
        lot = BinaryLottery(p_win=0.5, w_win=2.0, w_lose=0.0)
        ce = certainty_equivalent(CARA(lam=1.0), lot)
        assert ce == pytest.approx(-math.log(0.5 * math.exp(-2.0) + 0.5), rel=1e-12)
        assert ce == pytest.approx(0.5662, abs=1e-4)
        assert eval_utility(CARA(lam=1.0), ce) == pytest.approx(expected_utility(CARA(lam=1.0), lot))

    def test_cara_premium_ignores_wealth(self):
        lot = BinaryLottery(p_win=0.3, w_win=5.0, w_lose=1.0)
        rich = lot.shifted(10.0)
        assert (rich.w_win, rich.w_lose, rich.p_win) == (15.0, 11.0, 0.3)
        pref = CARA(lam=0.7)
        shift = certainty_equivalent(pref, rich) - certainty_equivalent(pref, lot)
        assert shift == pytest.approx(10.0, rel=1e-9)

    def test_cara_large_lambda_does_not_overflow(self):
        lot = BinaryLottery(p_win=0.5, w_win=10.0, w_lose=-10.0)
        assert math.isfinite(certainty_equivalent(CARA(lam=200.0), lot))

    @settings(max_examples=200)
    @given(pref=preferences(), p=st.floats(0.0, 1.0), a=wealth, b=wealth)
    def test_below_the_mean(self, pref, p, a, b):
        lot = BinaryLottery(p_win=p, w_win=a, w_lose=b)
        ce = certainty_equivalent(pref, lot)
        assert ce <= lot.mean + 1e-6 * max(1.0, abs(lot.mean))
        if isinstance(pref, Linear):
            assert ce == pytest.approx(lot.mean)


class TestPreferenceParsing:
    def test_discriminated_by_family(self):
        assert PREFERENCE_ADAPTER.validate_python({"family": "crra", "sigma": 2}) == CRRA(sigma=2.0)
        assert PREFERENCE_ADAPTER.validate_python({"family": "linear"}) == Linear()

    @pytest.mark.parametrize("bad", [{"family": "cara", "lam": 0}, {"family": "crra", "sigma": -1}])
    def test_coefficients_must_be_positive(self, bad):
        with pytest.raises(ValidationError):
            PREFERENCE_ADAPTER.validate_python(bad)

    def test_labels(self):
        assert CARA(lam=0.5).label() == "CARA(lambda=0.5)"
        assert CRRA(sigma=2).label() == "CRRA(sigma=2)"
