"""Tests for the nine sample averages and their Monte Carlo oracle."""

import math

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers

from src.core.errors import InfeasibleStateError, ValidationError
from src.core.events import RunEvent
from src.learning.averages import (
    AVERAGE_NAMES, avg_f2, avg_fu, avg_fv, avg_fy, avg_g2, avg_gf, compute_all,
    oracle_average, oracle_averages, oracle_band, random_states
)
from src.learning.generalization import gen_error
from src.learning.model import MacroState, ModelParams, build_covariance

SQRT_2PI = math.sqrt(2.0 * math.pi)
REFERENCE = ModelParams(a=0.5, eta_b=0.1, eta_j=0.2)


class TestClosedForms:

    def test_standard_state(self, params, standard_state):
        avg = compute_all(standard_state, params)
        tilt = 2.0 * math.exp(-0.125) - 1.0
        assert avg.gv == pytest.approx(-0.1 / SQRT_2PI, abs=1e-12)
        assert avg.g2 == pytest.approx(0.005, abs=1e-11)
        assert avg.fu == pytest.approx(-0.2 / SQRT_2PI, abs=1e-12)
        assert avg.fv == pytest.approx(0.2 / SQRT_2PI, abs=1e-12)
        assert avg.f2 == pytest.approx(0.02, abs=1e-12)
        assert avg.gu == pytest.approx(0.0, abs=1e-12)
        assert avg.fy == pytest.approx(0.0, abs=1e-12)
        assert avg.gy == pytest.approx(0.1 * tilt / SQRT_2PI, abs=1e-12)
        assert avg.gy == pytest.approx(0.0305188, abs=1e-7)

    def test_identity_covariance_gf(self, params, standard_state):
        assert avg_gf(standard_state, params) == pytest.approx(-0.005, abs=1e-9)

    @pytest.mark.parametrize("r_bj", [-0.5, 0.5, 0.9])
    def test_gf_with_teacher_independent_of_both(self, params, r_bj):
        # With R_B = R_J = 0 the label is independent of (v, u): P[v < 0, u > 0]
        state = MacroState(r_b=0.0, r_j=0.0, r_bj=r_bj, l_b=1.0, l_j=1.0)
        expected = -params.eta_b * params.eta_j * (0.25 - math.asin(r_bj) / (2.0 * math.pi))
        assert avg_gf(state, params) == pytest.approx(expected, abs=1e-8)

    def test_gf_linear_in_student_rate(self, params):
        state = MacroState(r_b=0.4, r_j=0.3, r_bj=0.5, l_b=1.0, l_j=1.0)
        doubled = ModelParams(a=params.a, eta_b=params.eta_b, eta_j=2 * params.eta_j)
        assert avg_gf(state, doubled) == pytest.approx(2 * avg_gf(state, params), rel=1e-7)

    @pytest.mark.parametrize("state", random_states(5, seed=3))
    def test_gf_never_positive(self, params, state):
        assert avg_gf(state, params) <= 0.0

    def test_f2_continuous_through_zero(self, params):
        below = MacroState(r_b=0.0, r_j=0.0, r_bj=-1e-9, l_b=1.0, l_j=1.0)
        above = MacroState(r_b=0.0, r_j=0.0, r_bj=1e-9, l_b=1.0, l_j=1.0)
        assert avg_f2(below, params) == pytest.approx(avg_f2(above, params), abs=1e-10)

    def test_degenerate_state_uses_oracle(self, params, collect_events):
        received = collect_events(RunEvent.ORACLE_FALLBACK)
        state = MacroState(r_b=1.0, r_j=0.5, r_bj=0.5, l_b=1.0, l_j=1.0)
        value = avg_gf(state, params)
        assert len(received) == 1
        assert value <= 0.0

    def test_infeasible_state(self, params):
        state = MacroState(r_b=0.9, r_j=0.9, r_bj=-0.9, l_b=1.0, l_j=1.0)
        with pytest.raises(InfeasibleStateError):
            compute_all(state, params)

    def test_student_examples(self, params):
        opposed = MacroState(r_b=0.0, r_j=0.0, r_bj=-1.0, l_b=1.0, l_j=1.0)
        assert avg_fu(opposed, params) == pytest.approx(-0.159577, abs=1e-6)
        sixty_degrees = MacroState(r_b=0.0, r_j=0.0, r_bj=0.5, l_b=1.0, l_j=1.0)
        assert avg_f2(sixty_degrees, params) == pytest.approx(0.0133333, abs=1e-7)
        lagging = MacroState(r_b=0.5, r_j=0.375, r_bj=0.5, l_b=1.0, l_j=1.0)
        assert avg_fy(lagging, params) == pytest.approx(0.0099736, abs=1e-7)


class TestIdentities:

    @settings(max_examples=40, deadline=None)
    @given(integers(min_value=0, max_value=100_000))
    def test_student_field_averages_cancel(self, seed):
        state = random_states(1, seed)[0]
        assert avg_fu(state, REFERENCE) == -avg_fv(state, REFERENCE)

    @settings(max_examples=40, deadline=None)
    @given(integers(min_value=0, max_value=100_000))
    def test_squared_updates(self, seed):
        state = random_states(1, seed)[0]
        g2 = avg_g2(state, REFERENCE)
        assert g2 == pytest.approx(REFERENCE.eta_b ** 2 * gen_error(state.r_b, REFERENCE.a).value,
                                   abs=1e-9)
        assert g2 >= 0.0
        assert avg_f2(state, REFERENCE) >= 0.0


class TestNearlyParallelMachines:

    @pytest.mark.parametrize("gap", [1e-6, 1e-7, 1e-8])
    def test_teacher_independent_of_both(self, params, gap, collect_events):
        received = collect_events(RunEvent.ORACLE_FALLBACK)
        state = MacroState(r_b=0.0, r_j=0.0, r_bj=1.0 - gap, l_b=1.0, l_j=1.0)
        expected = -params.eta_b * params.eta_j * math.acos(1.0 - gap) / (2.0 * math.pi)
        assert avg_gf(state, params) == pytest.approx(expected, rel=1e-4)
        assert received == []

    def test_matches_oracle(self, params):
        # Gram determinant 3.8e-7: a boundary layer of width ~1e-3 in the inner integral
        state = MacroState(r_b=0.6, r_j=0.6, r_bj=1.0 - 3e-7, l_b=1.0, l_j=1.0)
        mean, standard_error = oracle_averages(state, params, 2_000_000, seed=11)["gf"]
        assert mean < -10 * standard_error
        assert abs(avg_gf(state, params) - mean) <= 5 * standard_error


class TestOracle:

    def test_standard_state_within_band(self, params, standard_state):
        closed = compute_all(standard_state, params).as_dict()
        oracle = oracle_averages(standard_state, params, 200_000, seed=5)
        assert set(oracle) == set(AVERAGE_NAMES)
        for name in AVERAGE_NAMES:
            mean, standard_error = oracle[name]
            assert abs(closed[name] - mean) <= oracle_band(name, standard_error), name

    def test_single_average_matches_shared_sample(self, params, standard_state):
        cov = build_covariance(standard_state)
        mean, standard_error = oracle_average(lambda y, v, u: v * v, cov, 100_000, seed=1)
        assert mean == pytest.approx(1.0, abs=4 * standard_error)

    def test_deterministic(self, params, standard_state):
        first = oracle_averages(standard_state, params, 20_000, seed=9)
        second = oracle_averages(standard_state, params, 20_000, seed=9)
        assert first == second

    def test_sample_floor(self, params, standard_state):
        with pytest.raises(ValidationError):
            oracle_averages(standard_state, params, 1000, seed=1)
        with pytest.raises(ValidationError):
            oracle_average(lambda y, v, u: y, build_covariance(standard_state), 10, seed=1)

    def test_band(self):
        assert oracle_band("gv", 1e-4) == pytest.approx(4e-4)
        assert oracle_band("gf", 1e-6) == pytest.approx(1e-4)

    @pytest.mark.slow
    @pytest.mark.parametrize("state", random_states(20, seed=2007))
    def test_random_grid_full_oracle(self, params, state):
        closed = compute_all(state, params).as_dict()
        oracle = oracle_averages(state, params, 10_000_000, seed=2007)
        for name in AVERAGE_NAMES:
            mean, standard_error = oracle[name]
            assert abs(closed[name] - mean) <= oracle_band(name, standard_error), name
