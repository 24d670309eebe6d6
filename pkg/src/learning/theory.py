"""
Theory - Deterministic order-parameter dynamics.

In the thermodynamic limit, with time t = m / N, the five order
parameters follow coupled ODEs driven by the nine sample averages:

    dl_B/dt  = <gv> + <g^2> / (2 l_B)
    dl_J/dt  = <fu> + <f^2> / (2 l_J)
    dR_BJ/dt = -R_BJ (dl_J/dt / l_J + dl_B/dt / l_B)
               + <gu> / l_B + <fv> / l_J + <gf> / (l_B l_J)
    dR_J/dt  = (-R_J dl_J/dt + <fy>) / l_J
    dR_B/dt  = (<gy> - <gv> R_B) / l_B - R_B <g^2> / (2 l_B^2)

The last term of dR_B/dt carries <g^2>; it is what expanding
dR_B/dt = <gy>/l_B - (R_B/l_B) dl_B/dt with the dl_B/dt equation gives.
The system is integrated with classical fixed-step RK4.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..core.errors import InfeasibleStateError, LengthCollapseError, ValidationError
from ..core.events import EventSystem, RunEvent
from ..core.settings import MIN_LENGTH, RECORD_INTERVAL, THEORY_DT
from ..numerics.gaussmath import DEFAULT_QUADRATURE, QuadratureSpec
from .averages import compute_all
from .generalization import gen_error
from .model import MacroState, ModelParams, build_covariance

logger = logging.getLogger(__name__)

COLUMN_INDEX = {"R_B": 0, "R_J": 1, "R_BJ": 2, "l_B": 3, "l_J": 4}


@dataclass(frozen=True)
class TrajectoryRecord:
    """One measurement of a trajectory."""
    t: float
    state: MacroState
    eg_b: float
    eg_j: float

    def row(self) -> List[float]:
        """Values in CSV column order t, R_B, R_J, R_BJ, l_B, l_J, eg_B, eg_J."""
        return [self.t, *self.state.as_array().tolist(), self.eg_b, self.eg_j]


@dataclass
class Trajectory:
    """
    Time-ordered record of order parameters and generalization errors.

    Theory runs set dt to the RK4 step; simulation runs set it to 1/N.
    """
    params: ModelParams
    dt: float
    records: List[TrajectoryRecord] = field(default_factory=list)

    def append(self, record: TrajectoryRecord) -> None:
        if self.records and record.t <= self.records[-1].t:
            raise ValidationError(
                f"trajectory times must increase: {record.t} after {self.records[-1].t}"
            )
        self.records.append(record)

    def times(self) -> np.ndarray:
        return np.array([record.t for record in self.records])

    def column(self, name: str) -> np.ndarray:
        """Values of one CSV column (t, R_B, ..., eg_J) across the records."""
        if name == "t":
            return self.times()
        if name == "eg_B":
            return np.array([record.eg_b for record in self.records])
        if name == "eg_J":
            return np.array([record.eg_j for record in self.records])
        if name not in COLUMN_INDEX:
            raise KeyError(f"unknown trajectory column {name!r}")
        index = COLUMN_INDEX[name]
        return np.array([record.state.as_array()[index] for record in self.records])

    def as_matrix(self) -> np.ndarray:
        """Records as rows in CSV column order."""
        return np.array([record.row() for record in self.records])

    @property
    def final(self) -> TrajectoryRecord:
        return self.records[-1]

    def __len__(self) -> int:
        return len(self.records)


def standard_init() -> MacroState:
    """Thermodynamic-limit image of independent unit-normal initial vectors."""
    return MacroState(r_b=0.0, r_j=0.0, r_bj=0.0, l_b=1.0, l_j=1.0)


def make_record(t: float, state: MacroState, params: ModelParams,
                spec: QuadratureSpec = DEFAULT_QUADRATURE) -> TrajectoryRecord:
    """Attach both generalization errors to a state."""
    return TrajectoryRecord(
        t=t,
        state=state,
        eg_b=gen_error(state.r_b, params.a, spec).value,
        eg_j=gen_error(state.r_j, params.a, spec).value,
    )


def rhs(state: MacroState, params: ModelParams,
        spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """
    Time derivative of the order parameters.

    Returns:
        d/dt of (R_B, R_J, R_BJ, l_B, l_J)

    Raises:
        InfeasibleStateError: If the state's covariance is not PSD
    """
    avg = compute_all(state, params, spec)
    l_b, l_j = state.l_b, state.l_j

    dl_b = avg.gv + avg.g2 / (2.0 * l_b)
    dl_j = avg.fu + avg.f2 / (2.0 * l_j)
    dr_bj = (-state.r_bj * (dl_j / l_j + dl_b / l_b)
             + avg.gu / l_b + avg.fv / l_j + avg.gf / (l_b * l_j))
    dr_j = (-state.r_j * dl_j + avg.fy) / l_j
    dr_b = (avg.gy - avg.gv * state.r_b) / l_b - state.r_b * avg.g2 / (2.0 * l_b * l_b)

    return np.array([dr_b, dr_j, dr_bj, dl_b, dl_j])


def _guard_lengths(values: np.ndarray, t: float) -> None:
    if values[3] < MIN_LENGTH or values[4] < MIN_LENGTH:
        raise LengthCollapseError(
            f"machine length collapsed (l_B={values[3]:.3g}, l_J={values[4]:.3g})", t=t
        )


def _stage(values: np.ndarray, t: float) -> MacroState:
    _guard_lengths(values, t)
    try:
        return MacroState.from_array(values)
    except InfeasibleStateError as exc:
        raise InfeasibleStateError(str(exc), t=t) from exc


def rk4_step(state: MacroState, params: ModelParams, dt: float, t: float = 0.0,
             spec: QuadratureSpec = DEFAULT_QUADRATURE) -> MacroState:
    """Advance one classical Runge-Kutta step."""
    y = state.as_array()
    k1 = rhs(state, params, spec)
    k2 = rhs(_stage(y + 0.5 * dt * k1, t), params, spec)
    k3 = rhs(_stage(y + 0.5 * dt * k2, t), params, spec)
    k4 = rhs(_stage(y + dt * k3, t), params, spec)
    return _stage(y + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0, t + dt)


def _steps_per(interval: float, dt: float, name: str) -> int:
    steps = int(round(interval / dt))
    if steps < 1 or abs(steps * dt - interval) > 1e-9 * max(1.0, interval):
        raise ValidationError(f"{name}={interval:g} is not a positive multiple of dt={dt:g}")
    return steps


def integrate(params: ModelParams, init: MacroState, dt: float = THEORY_DT,
              t_max: float = 0.0, record_interval: float = RECORD_INTERVAL,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Trajectory:
    """
    Integrate the order-parameter ODEs with fixed-step RK4.

    Records are taken at t = 0 and every record_interval; times are exact
    multiples of dt so identical inputs give identical output.

    Args:
        params: Model parameters
        init: Initial state
        dt: RK4 step
        t_max: Horizon (0 gives a single record)
        record_interval: Time between records, a multiple of dt

    Returns:
        Trajectory of the run

    Raises:
        ValidationError: On dt <= 0, t_max < 0 or a misaligned interval
        InfeasibleStateError: If the state leaves the feasible set; carries t
        LengthCollapseError: If l_B or l_J drops below MIN_LENGTH; carries t
    """
    if not dt > 0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if not t_max >= 0:
        raise ValidationError(f"t_max must be >= 0, got {t_max}")

    build_covariance(init)
    steps_per_record = _steps_per(record_interval, dt, "record_interval")
    total_steps = int(round(t_max / dt))

    trajectory = Trajectory(params=params, dt=dt)
    trajectory.append(make_record(0.0, init, params, spec))

    EventSystem.emit(RunEvent.RUN_STARTED, {"kind": "theory", "steps": total_steps}, source=params)
    logger.info(f"theory run: a={params.a:g}, eta_B={params.eta_b:g}, eta_J={params.eta_j:g}, "
                f"dt={dt:g}, t_max={t_max:g}")

    state = init
    for step in range(1, total_steps + 1):
        t = step * dt
        state = rk4_step(state, params, dt, (step - 1) * dt, spec)
        if step % steps_per_record == 0 or step == total_steps:
            try:
                build_covariance(state)
            except InfeasibleStateError as exc:
                raise InfeasibleStateError(str(exc), t=t) from exc
            record = make_record(t, state, params, spec)
            trajectory.append(record)
            logger.debug(f"t={t:.4g} R_B={state.r_b:.6f} R_J={state.r_j:.6f} "
                         f"R_BJ={state.r_bj:.6f} eg_B={record.eg_b:.6f} eg_J={record.eg_j:.6f}")
            EventSystem.emit(RunEvent.RECORD_TAKEN, {"t": t, "record": record}, source=params)

    EventSystem.emit(RunEvent.RUN_COMPLETED, {"kind": "theory", "records": len(trajectory)},
                     source=params)
    return trajectory
