"""Tests for config document parsing."""

import pytest

from src.core.errors import ConfigParseError, ConfigValidationError, ValidationError
from src.core.settings import COMPARE_TOLERANCE, DEFAULT_SEED
from src.experiments.config import ExperimentMode, parse_config, with_overrides

THEORY_DOC = "a = 0.5\neta_B = 0.1\neta_J = 0.2\nmode = theory\nt_max = 50"


class TestParseConfig:

    def test_theory_document(self):
        config = parse_config(THEORY_DOC)
        assert config.mode is ExperimentMode.THEORY
        assert config.params.a == 0.5
        assert config.params.eta_b == 0.1
        assert config.params.eta_j == 0.2
        assert config.t_max == 50.0
        assert config.sim is None

    def test_defaults(self):
        config = parse_config(THEORY_DOC)
        assert config.dt == 0.01
        assert config.record_interval == 0.5
        assert config.seed == DEFAULT_SEED
        assert config.tolerance == COMPARE_TOLERANCE
        assert config.check_states == 0

    def test_simulation_defaults(self):
        config = parse_config(THEORY_DOC.replace("theory", "simulate") + "\nN = 500")
        assert config.sim.n == 500
        assert config.sim.trials == 1
        assert config.sim.test_inputs == 0
        assert config.sim.t_max == 50.0

    def test_comments_and_blank_lines(self):
        text = "# reference run\n\n" + THEORY_DOC.replace("t_max = 50", "t_max = 50  # horizon")
        assert parse_config(text).t_max == 50.0

    def test_sweep(self):
        config = parse_config("mode = sweep\na = 0.5\neta_B = 0.1\n"
                              "eta_J_list = 1.0, 0.2, 0.05, 0.01\nt_max = 10")
        assert config.eta_j_list == (1.0, 0.2, 0.05, 0.01)
        assert config.params.eta_j == 1.0

    def test_empty_sweep_list(self):
        with pytest.raises(ValidationError):
            parse_config("mode = sweep\na = 0.5\neta_B = 0.1\neta_J_list = \nt_max = 10")

    def test_empty_sweep_brackets(self):
        with pytest.raises(ConfigValidationError):
            parse_config("mode = sweep\na = 0.5\neta_B = 0.1\neta_J_list = []\nt_max = 10")

    def test_negative_threshold(self):
        with pytest.raises(ConfigValidationError, match="a must be > 0"):
            parse_config(THEORY_DOC.replace("a = 0.5", "a = -1"))

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigParseError) as info:
            parse_config(THEORY_DOC + "\nbeta = 3")
        assert info.value.line_number == 6
        assert "line 6" in str(info.value)

    @pytest.mark.parametrize("line", ["just words", "trials = 2.5", "a = 0.5", "dt = fast"])
    def test_parse_errors(self, line):
        with pytest.raises(ConfigParseError):
            parse_config(THEORY_DOC + "\n" + line)

    def test_missing_mode(self):
        with pytest.raises(ConfigValidationError, match="mode"):
            parse_config("a = 0.5\neta_B = 0.1\neta_J = 0.2\nt_max = 1")

    def test_missing_key_for_mode(self):
        with pytest.raises(ConfigValidationError, match="t_max"):
            parse_config("mode = theory\na = 0.5\neta_B = 0.1\neta_J = 0.2")

    def test_averages_check_needs_no_horizon(self):
        config = parse_config("mode = averages-check\na = 0.5\neta_B = 0.1\neta_J = 0.2")
        assert config.mode is ExperimentMode.AVERAGES_CHECK

    def test_invalid_simulation_settings(self):
        with pytest.raises(ConfigValidationError):
            parse_config(THEORY_DOC.replace("theory", "simulate") + "\nN = 10")

    def test_mode_from_command_line(self):
        text = "a = 0.5\neta_B = 0.1\neta_J = 0.2\nt_max = 1"
        assert parse_config(text, mode="theory").mode is ExperimentMode.THEORY

    def test_conflicting_mode(self):
        with pytest.raises(ConfigValidationError):
            parse_config(THEORY_DOC, mode="compare")


class TestOverrides:

    def test_seed_reaches_simulation(self):
        config = parse_config(THEORY_DOC.replace("theory", "simulate") + "\nN = 500")
        updated = with_overrides(config, seed=99, output_path="out", jobs=3)
        assert updated.seed == 99
        assert updated.sim.seed == 99
        assert updated.output_path == "out"
        assert updated.jobs == 3

    def test_no_overrides(self):
        config = parse_config(THEORY_DOC)
        assert with_overrides(config) is config

    def test_invalid_jobs(self):
        with pytest.raises(ConfigValidationError):
            with_overrides(parse_config(THEORY_DOC), jobs=0)
