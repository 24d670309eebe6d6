"""
Experiment Runner - Executes a parsed config and writes its CSV files.

Library code raises; this module is where errors become exit codes.

Modes and files:
    theory          theory.csv
    simulate        simulate_trial_<k>.csv, simulate_mean.csv
    compare         compare.csv
    averages-check  averages_check.csv
    sweep           theory_eta_J_<value>.csv per entry
"""

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Tuple

from ..core.errors import AcceptanceError, LabError
from ..core.events import EventData, EventSystem, RunEvent
from ..core.settings import EXIT_OK, ORDER_PARAMETERS
from ..learning.averages import (
    AVERAGE_NAMES, compute_all, oracle_averages, oracle_band, random_states
)
from ..learning.simulator import run_simulation
from ..learning.theory import Trajectory, integrate, standard_init
from ..utils.timer import timed
from .config import ExperimentConfig, ExperimentMode
from .csv_io import (
    header_lines, staged_output, write_averages_check, write_compare, write_trajectory
)

logger = logging.getLogger(__name__)


class ProgressReporter:
    """Logs run progress from the event bus."""

    def __init__(self):
        self.records = 0
        self.clamps = 0
        self.fallbacks = 0
        self._handlers: Dict[RunEvent, Callable[[EventData], None]] = {
            RunEvent.RUN_STARTED: self._on_run_started,
            RunEvent.RUN_COMPLETED: self._on_run_completed,
            RunEvent.RECORD_TAKEN: self._on_record,
            RunEvent.TRIAL_COMPLETED: self._on_trial_completed,
            RunEvent.FEASIBILITY_CLAMPED: self._on_clamped,
            RunEvent.ORACLE_FALLBACK: self._on_oracle_fallback,
        }

    def attach(self) -> None:
        for event_type, handler in self._handlers.items():
            EventSystem.subscribe(event_type, handler)

    def detach(self) -> None:
        for event_type, handler in self._handlers.items():
            EventSystem.unsubscribe(event_type, handler)

    def _on_run_started(self, event: EventData) -> None:
        logger.info(f"{event.get('kind')} run started")

    def _on_run_completed(self, event: EventData) -> None:
        logger.info(f"{event.get('kind')} run completed with {event.get('records')} records")

    def _on_record(self, event: EventData) -> None:
        self.records += 1
        logger.debug(f"record at t={event.get('t'):.4g}")

    def _on_trial_completed(self, event: EventData) -> None:
        logger.info(f"trial {event.get('trial')} completed")

    def _on_clamped(self, event: EventData) -> None:
        self.clamps += 1

    def _on_oracle_fallback(self, event: EventData) -> None:
        self.fallbacks += 1
        logger.debug(f"<{event.get('average')}> sampled at determinant {event.get('determinant'):.3g}")


# =============================================================================
# MODES
# =============================================================================

def _theory_trajectory(config: ExperimentConfig, eta_j: float) -> Trajectory:
    params = dataclasses.replace(config.params, eta_j=eta_j)
    return integrate(params, standard_init(), dt=config.dt, t_max=config.t_max,
                     record_interval=config.record_interval, spec=config.quadrature)


def _run_theory(config: ExperimentConfig, out_dir: Path) -> None:
    trajectory = _theory_trajectory(config, config.params.eta_j)
    write_trajectory(out_dir / "theory.csv", trajectory, header_lines(config.echo()))


def _run_simulate(config: ExperimentConfig, out_dir: Path) -> None:
    result = run_simulation(config.sim, config.params, jobs=config.jobs)
    with staged_output(out_dir) as staging:
        for trial, trajectory in enumerate(result.trials):
            echo = dict(config.echo(), trial=trial)
            write_trajectory(staging / f"simulate_trial_{trial}.csv", trajectory,
                             header_lines(echo, [config.seed]))
        write_trajectory(staging / "simulate_mean.csv", result.mean,
                         header_lines(config.echo(), [config.seed]), std=result.std)


def _run_compare(config: ExperimentConfig, out_dir: Path) -> None:
    theory = _theory_trajectory(config, config.params.eta_j)
    simulation = run_simulation(config.sim, config.params, jobs=config.jobs).mean
    deviations = write_compare(out_dir / "compare.csv", theory, simulation,
                               header_lines(config.echo(), [config.seed]))

    failing = {name: deviations[name] for name in ORDER_PARAMETERS
               if deviations[name] > config.tolerance}
    for name in ORDER_PARAMETERS:
        logger.info(f"max |theory - simulation| for {name}: {deviations[name]:.4g}")
    if failing:
        raise AcceptanceError(
            "deviation above tolerance "
            f"{config.tolerance:g}: " + ", ".join(f"{k}={v:.4g}" for k, v in failing.items())
        )


def check_averages(config: ExperimentConfig) -> Tuple[List[list], int]:
    """
    Compare every closed-form average with its oracle.

    Returns:
        (table rows, number of rows outside their band)
    """
    states = [standard_init()] + random_states(config.check_states, config.seed)
    rows = []
    failures = 0
    for index, state in enumerate(states):
        closed = compute_all(state, config.params, config.quadrature).as_dict()
        oracle = oracle_averages(state, config.params, config.oracle_samples, config.seed)
        for name in AVERAGE_NAMES:
            mean, standard_error = oracle[name]
            band = oracle_band(name, standard_error)
            deviation = abs(closed[name] - mean)
            passed = deviation <= band
            failures += not passed
            rows.append([index, state.r_b, state.r_j, state.r_bj, name,
                         closed[name], mean, standard_error, band, deviation, passed])
            if not passed:
                logger.warning(f"state {index}: <{name}> closed form {closed[name]:.6g} vs "
                               f"oracle {mean:.6g} (band {band:.3g})")
        logger.info(f"checked state {index + 1}/{len(states)}")
    return rows, failures


def _run_averages_check(config: ExperimentConfig, out_dir: Path) -> None:
    rows, failures = check_averages(config)
    write_averages_check(out_dir / "averages_check.csv", rows,
                         header_lines(config.echo(), [config.seed]))
    if failures:
        raise AcceptanceError(f"{failures} of {len(rows)} averages outside their oracle band")


def _run_sweep(config: ExperimentConfig, out_dir: Path) -> None:
    results: Dict[float, Trajectory] = {}
    errors: List[LabError] = []

    if config.jobs > 1 and len(config.eta_j_list) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            futures = {eta: pool.submit(_theory_trajectory, config, eta)
                       for eta in config.eta_j_list}
            for eta, future in futures.items():
                try:
                    results[eta] = future.result()
                except LabError as exc:
                    errors.append(exc)
                    logger.error(f"sweep entry eta_J={eta:g} failed: {exc}")
    else:
        for eta in config.eta_j_list:
            try:
                results[eta] = _theory_trajectory(config, eta)
            except LabError as exc:
                errors.append(exc)
                logger.error(f"sweep entry eta_J={eta:g} failed: {exc}")

    for eta, trajectory in results.items():
        echo = dict(config.echo(), eta_J=eta)
        write_trajectory(out_dir / f"theory_eta_J_{eta:g}.csv", trajectory, header_lines(echo))

    if errors:
        raise max(errors, key=lambda exc: exc.exit_code)


_MODES: Dict[ExperimentMode, Callable[[ExperimentConfig, Path], None]] = {
    ExperimentMode.THEORY: _run_theory,
    ExperimentMode.SIMULATE: _run_simulate,
    ExperimentMode.COMPARE: _run_compare,
    ExperimentMode.AVERAGES_CHECK: _run_averages_check,
    ExperimentMode.SWEEP: _run_sweep,
}


def run(config: ExperimentConfig) -> int:
    """
    Execute a config and write its files under config.output_path.

    Returns:
        Process exit code: 0 on success, otherwise the failing error's code
    """
    out_dir = Path(config.output_path)
    reporter = ProgressReporter()
    reporter.attach()
    try:
        with timed(f"{config.mode.value} run"):
            _MODES[config.mode](config, out_dir)
    except LabError as exc:
        logger.error(f"{config.mode.value} run failed: {exc}")
        return exc.exit_code
    finally:
        reporter.detach()
        if reporter.clamps:
            logger.warning(f"{reporter.clamps} covariance matrices were clamped to PSD")
        if reporter.fallbacks:
            logger.warning(f"{reporter.fallbacks} averages fell back to the Monte Carlo oracle")
    return EXIT_OK
