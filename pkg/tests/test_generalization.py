"""Tests for the generalization error against the nonmonotonic teacher."""

import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import floats

from src.core.errors import ValidationError
from src.learning.generalization import (
    argmin_gen_error, empirical_gen_error, gen_error, gen_error_curve,
    monotone_regime, optimal_r
)
from src.numerics.gaussmath import h_tail
from src.utils.rng import Stream, make_generator


def slope_of_gen_error(r, a):
    """d eg / dR = (1 - 2 exp(-a^2 / (2 s^2))) / (pi s), s = sqrt(1 - R^2)."""
    s = math.sqrt(1.0 - r * r)
    return (1.0 - 2.0 * math.exp(-a * a / (2.0 * s * s))) / (math.pi * s)


class TestGenErrorValues:

    @pytest.mark.parametrize("a", [0.25, 0.5, 1.0, 1.5])
    def test_orthogonal_is_half(self, a):
        assert gen_error(0.0, a).value == pytest.approx(0.5, abs=1e-9)

    def test_aligned(self):
        assert gen_error(1.0, 0.5).value == pytest.approx(0.3829249, abs=1e-6)

    def test_anti_aligned(self):
        assert gen_error(-1.0, 0.5).value == pytest.approx(2.0 * h_tail(0.5), abs=1e-12)

    def test_continuous_at_aligned_limit(self):
        near = gen_error(1.0 - 1e-6, 0.5).value
        assert near == pytest.approx(gen_error(1.0, 0.5).value, abs=1e-3)

    def test_carries_error_bound(self):
        result = gen_error(0.3, 0.5)
        assert 0.0 <= result.quadrature_abs_err < 1e-8

    @settings(max_examples=30, deadline=None)
    @given(floats(min_value=-0.99, max_value=0.99), floats(min_value=0.1, max_value=2.0))
    def test_reflection(self, r, a):
        assert gen_error(r, a).value + gen_error(-r, a).value == pytest.approx(1.0, abs=1e-8)

    @settings(max_examples=30, deadline=None)
    @given(floats(min_value=-1.0, max_value=1.0), floats(min_value=0.05, max_value=3.0))
    def test_bounded(self, r, a):
        assert 0.0 <= gen_error(r, a).value <= 1.0

    @pytest.mark.parametrize("r", [0.2, 0.5, 0.8])
    def test_slope_matches_closed_form(self, r):
        h = 1e-5
        numerical = (gen_error(r + h, 0.5).value - gen_error(r - h, 0.5).value) / (2 * h)
        assert numerical == pytest.approx(slope_of_gen_error(r, 0.5), abs=1e-4)

    @pytest.mark.parametrize("r, a", [(1.5, 0.5), (-1.1, 0.5), (0.2, 0.0), (0.2, -1.0)])
    def test_invalid(self, r, a):
        with pytest.raises(ValidationError):
            gen_error(r, a)


class TestMinimum:

    def test_reference_minimum(self):
        assert optimal_r(0.5) == pytest.approx(0.905354, abs=1e-6)
        assert argmin_gen_error(0.5) == pytest.approx(0.9051, abs=1e-3)

    @pytest.mark.parametrize("a", [0.3, 0.8, 1.1])
    def test_closed_form_matches_search(self, a):
        assert argmin_gen_error(a) == pytest.approx(optimal_r(a), abs=1e-3)

    def test_minimum_is_below_endpoints(self):
        r_star = optimal_r(0.5)
        assert gen_error(r_star, 0.5).value < gen_error(1.0, 0.5).value
        assert gen_error(r_star, 0.5).value < gen_error(0.0, 0.5).value

    def test_threshold_gives_zero(self, caplog):
        a = math.sqrt(2.0 * math.log(2.0))
        with caplog.at_level(logging.WARNING):
            assert optimal_r(a) == pytest.approx(0.0, abs=1e-7)
        assert monotone_regime(a)

    def test_monotone_regime_is_non_decreasing(self):
        values = [value for _, value in gen_error_curve(1.5, np.linspace(0.0, 0.99, 12))]
        assert np.all(np.diff(values) >= -1e-10)
        assert optimal_r(1.5) == 0.0

    def test_regime_flag(self):
        assert not monotone_regime(0.5)
        assert monotone_regime(1.2)


class TestEmpiricalGenError:

    @pytest.mark.parametrize("r", [0.0, 0.6, 0.95])
    def test_agrees_with_quadrature(self, r):
        rng = make_generator(11, 0, Stream.TEST)
        rate, standard_error = empirical_gen_error(r, 0.5, 200_000, rng)
        assert abs(rate - gen_error(r, 0.5).value) <= 4 * standard_error

    def test_curve_order(self):
        curve = gen_error_curve(0.5, [0.0, 0.5, 1.0])
        assert [r for r, _ in curve] == [0.0, 0.5, 1.0]
        assert curve[0][1] == pytest.approx(0.5, abs=1e-9)
