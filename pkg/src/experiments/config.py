"""
Experiment Config - Flat ``key = value`` run documents.

A config document holds one ``key = value`` pair per line; ``#`` starts a
comment. Keys not given fall back to the constants in core.settings.

Example:
    mode = theory
    a = 0.5
    eta_B = 0.1
    eta_J = 0.2
    t_max = 50
"""

import dataclasses
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

from ..core.errors import ConfigParseError, ConfigValidationError, ValidationError
from ..core.settings import (
    COMPARE_TOLERANCE, DEFAULT_JOBS, DEFAULT_OUTPUT_DIR, DEFAULT_SEED,
    ORACLE_MIN_SAMPLES, ORACLE_SAMPLES, QUAD_ABS_TOL, RECORD_INTERVAL,
    SIM_N, SIM_TEST_INPUTS, SIM_TRIALS, THEORY_DT
)
from ..learning.model import ModelParams
from ..learning.simulator import SimConfig
from ..numerics.gaussmath import DEFAULT_QUADRATURE, QuadratureSpec

logger = logging.getLogger(__name__)


class ExperimentMode(Enum):
    """What a run does."""
    THEORY = "theory"
    SIMULATE = "simulate"
    COMPARE = "compare"
    AVERAGES_CHECK = "averages-check"
    SWEEP = "sweep"


def _parse_float_list(text: str) -> Tuple[float, ...]:
    body = text.strip().strip("[]")
    if not body.strip():
        return ()
    return tuple(float(item) for item in body.split(","))


def _parse_int(text: str) -> int:
    value = float(text)
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


# Recognised keys and how their values are read
_PARSERS: Dict[str, Callable[[str], Any]] = {
    "mode": ExperimentMode,
    "a": float,
    "eta_B": float,
    "eta_J": float,
    "eta_J_list": _parse_float_list,
    "dt": float,
    "t_max": float,
    "record_interval": float,
    "N": _parse_int,
    "seed": _parse_int,
    "trials": _parse_int,
    "test_inputs": _parse_int,
    "jobs": _parse_int,
    "oracle_samples": _parse_int,
    "check_states": _parse_int,
    "tolerance": float,
    "abs_tol": float,
    "output_path": str,
}

# Keys each mode cannot run without
_REQUIRED: Dict[ExperimentMode, Tuple[str, ...]] = {
    ExperimentMode.THEORY: ("a", "eta_B", "eta_J", "t_max"),
    ExperimentMode.SIMULATE: ("a", "eta_B", "eta_J", "t_max"),
    ExperimentMode.COMPARE: ("a", "eta_B", "eta_J", "t_max"),
    ExperimentMode.AVERAGES_CHECK: ("a", "eta_B", "eta_J"),
    ExperimentMode.SWEEP: ("a", "eta_B", "eta_J_list", "t_max"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated run description."""

    mode: ExperimentMode
    params: ModelParams
    """Model parameters; in sweep mode eta_J is the first list entry."""

    sim: Optional[SimConfig] = None
    """Simulation settings (simulate and compare modes)."""

    dt: float = THEORY_DT
    t_max: float = 0.0
    record_interval: float = RECORD_INTERVAL
    eta_j_list: Tuple[float, ...] = ()
    seed: int = DEFAULT_SEED
    jobs: int = DEFAULT_JOBS
    oracle_samples: int = ORACLE_SAMPLES
    check_states: int = 0
    tolerance: float = COMPARE_TOLERANCE
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE
    output_path: str = DEFAULT_OUTPUT_DIR

    def echo(self) -> Dict[str, Any]:
        """Flat key/value view written into CSV headers."""
        values = {
            "mode": self.mode.value,
            "a": self.params.a,
            "eta_B": self.params.eta_b,
            "eta_J": self.params.eta_j,
            "dt": self.dt,
            "t_max": self.t_max,
            "record_interval": self.record_interval,
            "seed": self.seed,
            "abs_tol": self.quadrature.abs_tol,
        }
        if self.mode is ExperimentMode.SWEEP:
            values["eta_J_list"] = ",".join(f"{eta:g}" for eta in self.eta_j_list)
        if self.sim is not None:
            values.update(N=self.sim.n, trials=self.sim.trials, test_inputs=self.sim.test_inputs)
        if self.mode is ExperimentMode.AVERAGES_CHECK:
            values.update(oracle_samples=self.oracle_samples, check_states=self.check_states)
        if self.mode is ExperimentMode.COMPARE:
            values["tolerance"] = self.tolerance
        return values


# =============================================================================
# PARSING
# =============================================================================

def _read_pairs(text: str) -> Dict[str, Tuple[int, str]]:
    """Split a document into key -> (line number, raw value)."""
    pairs: Dict[str, Tuple[int, str]] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(line_number, f"expected 'key = value', got {raw_line.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigParseError(line_number, f"unknown key {key!r}")
        if key in pairs:
            raise ConfigParseError(line_number, f"duplicate key {key!r}")
        if not value:
            raise ConfigParseError(line_number, f"missing value for {key!r}")
        pairs[key] = (line_number, value)
    return pairs


def _convert(pairs: Dict[str, Tuple[int, str]]) -> Dict[str, Any]:
    values = {}
    for key, (line_number, raw) in pairs.items():
        try:
            values[key] = _PARSERS[key](raw)
        except ValueError as exc:
            raise ConfigParseError(line_number, f"bad value for {key!r}: {exc}") from exc
    return values


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigValidationError(message)


def parse_config(text: str, mode: Optional[str] = None) -> ExperimentConfig:
    """
    Parse and validate a config document.

    Args:
        text: Document text
        mode: Mode chosen outside the document; must agree with a mode key

    Returns:
        ExperimentConfig with defaults filled in

    Raises:
        ConfigParseError: On a malformed line, unknown key or unreadable value
        ConfigValidationError: On a missing key or a violated invariant
    """
    values = _convert(_read_pairs(text))

    if mode is not None:
        try:
            requested = ExperimentMode(mode)
        except ValueError as exc:
            raise ConfigValidationError(f"unknown mode {mode!r}") from exc
        _check(values.setdefault("mode", requested) is requested,
               f"config mode {values['mode'].value!r} does not match requested {mode!r}")
    _check("mode" in values, "missing required key 'mode'")
    mode = values["mode"]
    missing = [key for key in _REQUIRED[mode] if key not in values]
    _check(not missing, f"mode {mode.value} requires {', '.join(missing)}")

    eta_j_list = values.get("eta_J_list", ())
    if mode is ExperimentMode.SWEEP:
        _check(len(eta_j_list) > 0, "eta_J_list must be non-empty in sweep mode")
        eta_j = eta_j_list[0]
    else:
        eta_j = values["eta_J"]

    try:
        params = ModelParams(a=values["a"], eta_b=values["eta_B"], eta_j=eta_j)
        for eta in eta_j_list:
            ModelParams(a=values["a"], eta_b=values["eta_B"], eta_j=eta)
        quadrature = QuadratureSpec(abs_tol=values.get("abs_tol", QUAD_ABS_TOL))
    except ValidationError as exc:
        raise ConfigValidationError(str(exc)) from exc

    dt = values.get("dt", THEORY_DT)
    t_max = values.get("t_max", 0.0)
    record_interval = values.get("record_interval", RECORD_INTERVAL)
    seed = values.get("seed", DEFAULT_SEED)
    _check(dt > 0, f"dt must be > 0, got {dt}")
    _check(t_max >= 0, f"t_max must be >= 0, got {t_max}")
    _check(record_interval > 0, f"record_interval must be > 0, got {record_interval}")
    _check(seed >= 0, f"seed must be non-negative, got {seed}")

    jobs = values.get("jobs", DEFAULT_JOBS)
    oracle_samples = values.get("oracle_samples", ORACLE_SAMPLES)
    check_states = values.get("check_states", 0)
    tolerance = values.get("tolerance", COMPARE_TOLERANCE)
    _check(jobs >= 1, f"jobs must be >= 1, got {jobs}")
    _check(oracle_samples >= ORACLE_MIN_SAMPLES,
           f"oracle_samples must be >= {ORACLE_MIN_SAMPLES}, got {oracle_samples}")
    _check(check_states >= 0, f"check_states must be >= 0, got {check_states}")
    _check(tolerance > 0, f"tolerance must be > 0, got {tolerance}")

    sim = None
    if mode in (ExperimentMode.SIMULATE, ExperimentMode.COMPARE):
        try:
            sim = SimConfig(
                n=values.get("N", SIM_N),
                seed=seed,
                t_max=t_max,
                record_interval=record_interval,
                test_inputs=values.get("test_inputs", SIM_TEST_INPUTS),
                trials=values.get("trials", SIM_TRIALS),
            )
        except ValidationError as exc:
            raise ConfigValidationError(str(exc)) from exc

    config = ExperimentConfig(
        mode=mode,
        params=params,
        sim=sim,
        dt=dt,
        t_max=t_max,
        record_interval=record_interval,
        eta_j_list=tuple(eta_j_list),
        seed=seed,
        jobs=jobs,
        oracle_samples=oracle_samples,
        check_states=check_states,
        tolerance=tolerance,
        quadrature=quadrature,
        output_path=values.get("output_path", DEFAULT_OUTPUT_DIR),
    )
    logger.debug(f"parsed {mode.value} config: {config.echo()}")
    return config


def with_overrides(config: ExperimentConfig, seed: Optional[int] = None,
                   output_path: Optional[str] = None,
                   jobs: Optional[int] = None) -> ExperimentConfig:
    """Apply command-line overrides on top of a parsed config."""
    changes: Dict[str, Any] = {}
    if seed is not None:
        _check(seed >= 0, f"seed must be non-negative, got {seed}")
        changes["seed"] = seed
        if config.sim is not None:
            changes["sim"] = dataclasses.replace(config.sim, seed=seed)
    if output_path is not None:
        changes["output_path"] = output_path
    if jobs is not None:
        _check(jobs >= 1, f"jobs must be >= 1, got {jobs}")
        changes["jobs"] = jobs
    return dataclasses.replace(config, **changes) if changes else config
