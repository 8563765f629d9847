import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kavlab.scaling import fit_exponent, minimize_two_term, select_lambda, select_lambda_div


class TestFitExponent:
    def test_exact_inverse_square(self):
        xs = [1.0, 2.0, 4.0, 8.0]
        fit = fit_exponent([(x, 7.0 * x**-2) for x in xs])
        assert np.isclose(fit.exponent, -2.0, atol=1e-12)
        assert np.isclose(fit.r_squared, 1.0)
        assert fit.half_width <= 1e-10

    def test_square_root(self):
        fit = fit_exponent([(x, x**0.5) for x in (1.0, 3.0, 9.0, 27.0)])
        assert np.isclose(fit.exponent, 0.5, atol=1e-12)

    @given(
        expo=st.floats(min_value=-3.0, max_value=3.0),
        amp=st.floats(min_value=0.1, max_value=10.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_recovers_random_power_laws(self, expo, amp):
        xs = [0.5, 1.0, 2.0, 4.0, 8.0]
        fit = fit_exponent([(x, amp * x**expo) for x in xs])
        assert abs(fit.exponent - expo) <= 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            fit_exponent([(1.0, 1.0), (2.0, 2.0)])
        with pytest.raises(ValueError):
            fit_exponent([(1.0, 1.0), (2.0, -2.0), (3.0, 1.0)])


class TestLambdaRules:
    def test_quotient(self):
        assert select_lambda(2.0, 1.0) == 2.0
        assert select_lambda(1.0, 1.0) == 1.0
        assert np.isclose(select_lambda(3.0 * 1.7, 3.0 * 0.4), select_lambda(1.7, 0.4))
        with pytest.raises(ValueError):
            select_lambda(0.0, 1.0)

    def test_div_rule(self):
        assert select_lambda_div(1.0) == 1.0
        assert np.isclose(select_lambda_div(8.0), 4.0)
        with pytest.raises(ValueError):
            select_lambda_div(0.0)

    def test_quotient_minimizes_sqrt_pair(self):
        a, b = 2.3, 0.7
        fun = lambda lam: a / np.sqrt(lam) + b * np.sqrt(lam)  # noqa: E731
        lam_opt = minimize_two_term(fun, 1e-8, 1e8)
        assert np.isclose(lam_opt, select_lambda(a, b), rtol=1e-6)

    def test_div_minimizer_exponent(self):
        h, f = 0.8, 1.3
        stars = []
        ks = [2.0, 4.0, 8.0, 16.0]
        for k in ks:
            fun = lambda lam, kk=k: kk * lam**-2.5 * h + lam**0.5 / kk * f  # noqa: E731
            stars.append(minimize_two_term(fun, 1e-3, 1e4))
        fit = fit_exponent(list(zip(ks, stars)))
        assert abs(fit.exponent - 2.0 / 3.0) <= 1e-6
