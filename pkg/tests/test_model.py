"""Tests for the machines, the state types and the covariance."""

import logging

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis.strategies import floats, integers

from src.core.errors import InfeasibleStateError, ValidationError
from src.core.events import RunEvent
from src.learning.averages import random_states
from src.learning.model import (
    MacroState, ModelParams, build_covariance,
    f_magnitude, g_magnitude, true_teacher_output
)

REFERENCE = ModelParams(a=0.5, eta_b=0.1, eta_j=0.2)
FIELDS = floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_subnormal=False)


class TestTrueTeacher:

    @pytest.mark.parametrize("y, expected", [
        (-1.0, -1.0), (-0.5, 1.0), (-0.25, 1.0), (0.0, 1.0),
        (0.25, -1.0), (0.5, 1.0), (1.0, 1.0),
    ])
    def test_output(self, y, expected):
        assert true_teacher_output(y, 0.5) == expected

    def test_vectorised(self):
        out = true_teacher_output(np.array([-1.0, 0.25, 1.0]), 0.5)
        np.testing.assert_array_equal(out, [-1.0, -1.0, 1.0])

    @given(FIELDS)
    def test_odd_away_from_zero_and_threshold(self, y):
        assume(abs(y) not in (0.0, REFERENCE.a))
        assert true_teacher_output(-y, REFERENCE.a) == -true_teacher_output(y, REFERENCE.a)


class TestUpdateMagnitudes:

    def test_moving_teacher_updates_on_disagreement(self, params):
        assert g_magnitude(1.0, -1.0, params) == pytest.approx(0.1)
        assert g_magnitude(0.25, 1.0, params) == pytest.approx(-0.1)

    def test_moving_teacher_silent_on_agreement(self, params):
        assert g_magnitude(1.0, 1.0, params) == 0.0
        assert g_magnitude(0.25, -1.0, params) == 0.0

    def test_student_follows_moving_teacher_sign(self):
        assert f_magnitude(-1.0, 1.0, 0.2) == pytest.approx(0.2)
        assert f_magnitude(1.0, -1.0, 0.2) == pytest.approx(-0.2)
        assert f_magnitude(1.0, 1.0, 0.2) == 0.0

    def test_vectorised(self, params):
        y = np.array([1.0, 1.0, 0.25])
        v = np.array([-1.0, 1.0, 1.0])
        np.testing.assert_allclose(g_magnitude(y, v, params), [0.1, 0.0, -0.1])

    @given(FIELDS, FIELDS)
    def test_moving_teacher_silent_exactly_when_it_agrees(self, y, v):
        d = true_teacher_output(y, REFERENCE.a)
        assert (g_magnitude(y, v, REFERENCE) == 0.0) == (v * d > 0)

    @given(FIELDS, FIELDS)
    def test_student_update_flips_with_both_fields(self, u, v):
        assume(u != 0.0 and v != 0.0)
        assert f_magnitude(-u, -v, REFERENCE.eta_j) == -f_magnitude(u, v, REFERENCE.eta_j)


class TestModelParams:

    @pytest.mark.parametrize("kwargs", [
        {"a": 0.0, "eta_b": 0.1, "eta_j": 0.2},
        {"a": 0.5, "eta_b": -0.1, "eta_j": 0.2},
        {"a": 0.5, "eta_b": 0.1, "eta_j": float("nan")},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValidationError):
            ModelParams(**kwargs)

    def test_monotone_regime_warns(self, caplog):
        with caplog.at_level(logging.WARNING):
            params = ModelParams(a=1.2, eta_b=0.1, eta_j=0.2)
        assert params.monotone_regime
        assert "monotone" in caplog.text

    def test_reference_not_monotone(self, params):
        assert not params.monotone_regime


class TestMacroState:

    @pytest.mark.parametrize("kwargs", [
        {"r_b": 1.5, "r_j": 0.0, "r_bj": 0.0, "l_b": 1.0, "l_j": 1.0},
        {"r_b": 0.0, "r_j": 0.0, "r_bj": 0.0, "l_b": 0.0, "l_j": 1.0},
        {"r_b": float("nan"), "r_j": 0.0, "r_bj": 0.0, "l_b": 1.0, "l_j": 1.0},
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(InfeasibleStateError):
            MacroState(**kwargs)

    def test_array_order(self):
        state = MacroState(r_b=0.1, r_j=0.2, r_bj=0.3, l_b=1.4, l_j=1.5)
        np.testing.assert_array_equal(state.as_array(), [0.1, 0.2, 0.3, 1.4, 1.5])
        assert MacroState.from_array(state.as_array()) == state

    def test_gram_determinant(self, standard_state):
        assert standard_state.gram_determinant() == 1.0
        aligned = MacroState(r_b=1.0, r_j=0.5, r_bj=0.5, l_b=1.0, l_j=1.0)
        assert aligned.gram_determinant() == pytest.approx(0.0, abs=1e-15)


class TestCovariance:

    def test_standard_state_is_identity(self, standard_state):
        cov = build_covariance(standard_state)
        np.testing.assert_array_equal(cov.matrix, np.eye(3))
        assert cov.determinant == pytest.approx(1.0)

    def test_read_only(self, standard_state):
        cov = build_covariance(standard_state)
        with pytest.raises(ValueError):
            cov.matrix[0, 1] = 0.5

    def test_infeasible(self):
        state = MacroState(r_b=0.9, r_j=0.9, r_bj=-0.9, l_b=1.0, l_j=1.0)
        with pytest.raises(InfeasibleStateError):
            build_covariance(state)

    def test_round_off_is_clamped(self, collect_events, caplog):
        received = collect_events(RunEvent.FEASIBILITY_CLAMPED)
        # Gram determinant -(R_J - R_BJ)^2 = -1e-10
        state = MacroState(r_b=1.0, r_j=0.5, r_bj=0.5 + 1e-5, l_b=1.0, l_j=1.0)
        with caplog.at_level(logging.WARNING):
            cov = build_covariance(state)
        assert len(received) == 1
        assert "clamping" in caplog.text
        np.testing.assert_allclose(np.diag(cov.matrix), 1.0)
        assert cov.eigenvalues().min() >= -1e-12

    @pytest.mark.parametrize("state", [
        MacroState(r_b=0.3, r_j=-0.2, r_bj=0.6, l_b=1.0, l_j=1.0),
        MacroState(r_b=1.0, r_j=0.5, r_bj=0.5, l_b=1.0, l_j=1.0),
    ])
    def test_factor_reproduces_matrix(self, state):
        cov = build_covariance(state)
        factor = cov.factor()
        np.testing.assert_allclose(factor @ factor.T, cov.matrix, atol=1e-12)

    def test_equal_cosines(self):
        state = MacroState(r_b=0.5, r_j=0.5, r_bj=0.5, l_b=1.0, l_j=1.0)
        assert build_covariance(state).determinant == pytest.approx(0.5, abs=1e-12)

    def test_teacher_aligned_with_two_orthogonal_machines(self):
        state = MacroState(r_b=1.0, r_j=1.0, r_bj=0.0, l_b=1.0, l_j=1.0)
        with pytest.raises(InfeasibleStateError):
            build_covariance(state)

    @settings(max_examples=50, deadline=None)
    @given(integers(min_value=0, max_value=100_000))
    def test_feasible_states_are_semidefinite(self, seed):
        state = random_states(1, seed)[0]
        assert build_covariance(state).eigenvalues().min() >= -1e-9
