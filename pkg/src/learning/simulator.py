"""
Simulator - Finite-N Monte Carlo of the actual learning process.

Each step draws an input x with components N(0, 1/N), lets the moving
teacher B learn from the true teacher A and the student J learn from B's
output for the same x. Both updates use the pre-update B, so g and f are
evaluated at the same (y, v, u) as in the ODEs.

Random streams per (seed, trial): INIT for the three initial vectors,
TRAIN for training inputs, TEST for generalization tests.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import repeat
from typing import List, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..core.events import EventSystem, RunEvent
from ..core.settings import (
    DEFAULT_SEED, RECORD_INTERVAL, SIM_INPUT_BLOCK, SIM_MIN_N,
    SIM_MIN_TEST_INPUTS, SIM_N, SIM_TEST_CHUNK, SIM_TEST_INPUTS, SIM_TRIALS
)
from ..utils.rng import Stream, make_generator
from .generalization import gen_error
from .model import MacroState, ModelParams, f_magnitude, g_magnitude, true_teacher_output
from .theory import Trajectory, TrajectoryRecord

logger = logging.getLogger(__name__)


@dataclass
class MicroState:
    """
    Weight vectors of the three machines.

    The true teacher's array is read-only: it never changes after
    initialization. B and J are updated in place.
    """
    n: int
    true_teacher: np.ndarray
    moving_teacher: np.ndarray
    student: np.ndarray
    step_count: int = 0


@dataclass(frozen=True)
class SimConfig:
    """Settings of a simulation run."""

    n: int = SIM_N
    """Dimension N."""

    seed: int = DEFAULT_SEED
    t_max: float = 0.0
    """Continuous-time horizon; the run takes round(N t_max) steps."""

    record_interval: float = RECORD_INTERVAL
    test_inputs: int = SIM_TEST_INPUTS
    """Test inputs per measurement; 0 uses the analytic eg at the measured R."""

    trials: int = SIM_TRIALS

    def __post_init__(self):
        if self.n < SIM_MIN_N:
            raise ValidationError(f"N must be >= {SIM_MIN_N}, got {self.n}")
        if self.seed < 0:
            raise ValidationError(f"seed must be non-negative, got {self.seed}")
        if not self.t_max >= 0:
            raise ValidationError(f"t_max must be >= 0, got {self.t_max}")
        if not self.record_interval > 0 or round(self.record_interval * self.n) < 1:
            raise ValidationError(
                f"record_interval must cover at least one step, got {self.record_interval}"
            )
        if self.test_inputs != 0 and self.test_inputs < SIM_MIN_TEST_INPUTS:
            raise ValidationError(
                f"test_inputs must be 0 or >= {SIM_MIN_TEST_INPUTS}, got {self.test_inputs}"
            )
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")

    @property
    def total_steps(self) -> int:
        return int(round(self.t_max * self.n))

    @property
    def steps_per_record(self) -> int:
        return int(round(self.record_interval * self.n))


@dataclass
class SimulationResult:
    """Per-trial trajectories and their pointwise aggregate."""
    trials: List[Trajectory]
    mean: Trajectory
    std: np.ndarray
    """Across-trial standard deviation, one row per record, CSV columns after t."""


# =============================================================================
# MICRO DYNAMICS
# =============================================================================

def init_micro(n: int, seed: int, trial: int = 0) -> MicroState:
    """Draw A, B and J with i.i.d. unit-normal components."""
    if n < SIM_MIN_N:
        raise ValidationError(f"N must be >= {SIM_MIN_N}, got {n}")
    rng = make_generator(seed, trial, Stream.INIT)
    a_vec, b_vec, j_vec = rng.standard_normal((3, n))
    a_vec = a_vec.copy()
    a_vec.setflags(write=False)
    return MicroState(n=n, true_teacher=a_vec, moving_teacher=b_vec.copy(), student=j_vec.copy())


def _learn(micro: MicroState, params: ModelParams, x: np.ndarray) -> None:
    """Apply both perceptron updates for one input."""
    y = float(micro.true_teacher @ x)
    # Only signs of v and u enter g and f, so the raw projections suffice.
    v = float(micro.moving_teacher @ x)
    u = float(micro.student @ x)

    g = g_magnitude(y, v, params)
    f = f_magnitude(u, v, params.eta_j)
    if g:
        micro.moving_teacher += g * x
    if f:
        micro.student += f * x
    micro.step_count += 1


def step(micro: MicroState, params: ModelParams, rng: np.random.Generator) -> MicroState:
    """Draw one input and apply one learning step; updates micro in place."""
    x = rng.standard_normal(micro.n) / math.sqrt(micro.n)
    _learn(micro, params, x)
    return micro


def train(micro: MicroState, params: ModelParams, rng: np.random.Generator,
          n_steps: int) -> MicroState:
    """Apply n_steps learning steps, drawing inputs in blocks."""
    scale = 1.0 / math.sqrt(micro.n)
    remaining = n_steps
    while remaining > 0:
        block = min(SIM_INPUT_BLOCK, remaining)
        inputs = rng.standard_normal((block, micro.n))
        inputs *= scale
        for x in inputs:
            _learn(micro, params, x)
        remaining -= block
    return micro


def measure(micro: MicroState) -> MacroState:
    """Order parameters of a micro state by exact dot products."""
    a_vec, b_vec, j_vec = micro.true_teacher, micro.moving_teacher, micro.student
    norm_a = np.linalg.norm(a_vec)
    norm_b = np.linalg.norm(b_vec)
    norm_j = np.linalg.norm(j_vec)

    def cosine(p: np.ndarray, q: np.ndarray, norm_p: float, norm_q: float) -> float:
        return float(np.clip((p @ q) / (norm_p * norm_q), -1.0, 1.0))

    root_n = math.sqrt(micro.n)
    return MacroState(
        r_b=cosine(a_vec, b_vec, norm_a, norm_b),
        r_j=cosine(a_vec, j_vec, norm_a, norm_j),
        r_bj=cosine(b_vec, j_vec, norm_b, norm_j),
        l_b=float(norm_b / root_n),
        l_j=float(norm_j / root_n),
    )


def estimate_gen_errors(micro: MicroState, params: ModelParams, test_inputs: int,
                        rng: np.random.Generator) -> Tuple[float, float]:
    """
    Empirical generalization errors of B and J on fresh inputs.

    Returns:
        (eg_B, eg_J) as disagreement rates with the true teacher
    """
    if test_inputs < SIM_MIN_TEST_INPUTS:
        raise ValidationError(f"test_inputs must be >= {SIM_MIN_TEST_INPUTS}, got {test_inputs}")

    weights = np.stack([micro.true_teacher, micro.moving_teacher, micro.student], axis=1)
    scale = 1.0 / math.sqrt(micro.n)
    errors_b = 0
    errors_j = 0
    remaining = test_inputs
    while remaining:
        size = min(SIM_TEST_CHUNK, remaining)
        y, v, u = (rng.standard_normal((size, micro.n)) @ weights * scale).T
        d = true_teacher_output(y, params.a)
        errors_b += int(np.count_nonzero(d != np.where(v >= 0, 1.0, -1.0)))
        errors_j += int(np.count_nonzero(d != np.where(u >= 0, 1.0, -1.0)))
        remaining -= size
    return errors_b / test_inputs, errors_j / test_inputs


# =============================================================================
# RUNS
# =============================================================================

def _record(micro: MicroState, cfg: SimConfig, params: ModelParams,
            test_rng: np.random.Generator) -> TrajectoryRecord:
    state = measure(micro)
    if cfg.test_inputs:
        eg_b, eg_j = estimate_gen_errors(micro, params, cfg.test_inputs, test_rng)
    else:
        eg_b = gen_error(state.r_b, params.a).value
        eg_j = gen_error(state.r_j, params.a).value
    return TrajectoryRecord(t=micro.step_count / cfg.n, state=state, eg_b=eg_b, eg_j=eg_j)


def run_trial(cfg: SimConfig, params: ModelParams, trial: int) -> Trajectory:
    """One independent realization; deterministic per (seed, trial)."""
    micro = init_micro(cfg.n, cfg.seed, trial)
    train_rng = make_generator(cfg.seed, trial, Stream.TRAIN)
    test_rng = make_generator(cfg.seed, trial, Stream.TEST)

    EventSystem.emit(RunEvent.TRIAL_STARTED, {"trial": trial, "n": cfg.n}, source=cfg)
    trajectory = Trajectory(params=params, dt=1.0 / cfg.n)
    trajectory.append(_record(micro, cfg, params, test_rng))

    total = cfg.total_steps
    while micro.step_count < total:
        chunk = min(cfg.steps_per_record, total - micro.step_count)
        train(micro, params, train_rng, chunk)
        record = _record(micro, cfg, params, test_rng)
        trajectory.append(record)
        EventSystem.emit(RunEvent.RECORD_TAKEN, {"t": record.t, "trial": trial, "record": record},
                         source=cfg)

    EventSystem.emit(RunEvent.TRIAL_COMPLETED, {"trial": trial, "records": len(trajectory)},
                     source=cfg)
    logger.debug(f"trial {trial} finished after {micro.step_count} steps")
    return trajectory


def aggregate(trials: List[Trajectory]) -> Tuple[Trajectory, np.ndarray]:
    """Pointwise mean trajectory and across-trial standard deviation."""
    stacked = np.stack([trajectory.as_matrix() for trajectory in trials])
    mean = stacked.mean(axis=0)
    values = stacked[:, :, 1:]
    std = values.std(axis=0, ddof=1) if len(trials) > 1 else np.zeros_like(values[0])

    first = trials[0]
    result = Trajectory(params=first.params, dt=first.dt)
    for record, row in zip(first.records, mean):
        result.append(TrajectoryRecord(
            t=record.t,
            state=MacroState.from_array(row[1:6]),
            eg_b=float(row[6]),
            eg_j=float(row[7]),
        ))
    return result, std


def run_simulation(cfg: SimConfig, params: ModelParams, jobs: int = 1) -> SimulationResult:
    """
    Run cfg.trials independent trials and aggregate them.

    With jobs > 1 trials run in a process pool; results are ordered by
    trial index either way, so the aggregate does not depend on jobs.
    """
    logger.info(f"simulation: N={cfg.n}, trials={cfg.trials}, t_max={cfg.t_max:g}, "
                f"a={params.a:g}, eta_B={params.eta_b:g}, eta_J={params.eta_j:g}")
    EventSystem.emit(RunEvent.RUN_STARTED, {"kind": "simulation", "trials": cfg.trials}, source=cfg)

    trial_ids = range(cfg.trials)
    if jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            trials = list(pool.map(run_trial, repeat(cfg), repeat(params), trial_ids))
    else:
        trials = [run_trial(cfg, params, trial) for trial in trial_ids]

    mean, std = aggregate(trials)
    EventSystem.emit(RunEvent.RUN_COMPLETED, {"kind": "simulation", "records": len(mean)},
                     source=cfg)
    return SimulationResult(trials=trials, mean=mean, std=std)
