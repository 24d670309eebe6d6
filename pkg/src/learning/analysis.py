"""
Trajectory analysis helpers for the qualitative learning claims and for
theory/simulation comparison.
"""

from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.errors import ValidationError
from .theory import Trajectory


def count_crossings(values: Sequence[float], level: float) -> int:
    """Number of times a sampled curve passes through level."""
    side = np.sign(np.asarray(values, dtype=float) - level)
    side = side[side != 0]
    return int(np.count_nonzero(side[1:] != side[:-1]))


def interior_local_minima(values: Sequence[float]) -> List[int]:
    """Indices i (not the endpoints) with values[i-1] > values[i] <= values[i+1]."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return []
    inner = (v[1:-1] < v[:-2]) & (v[1:-1] <= v[2:])
    return [int(i) + 1 for i in np.flatnonzero(inner)]


def outperformance_windows(trajectory: Trajectory) -> List[Tuple[float, float]]:
    """
    Intervals of recorded time during which the student beats the moving
    teacher (eg_J < eg_B), as (first record time, last record time).
    """
    times = trajectory.times()
    better = trajectory.column("eg_J") < trajectory.column("eg_B")
    windows = []
    start = None
    for i, flag in enumerate(better):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            windows.append((float(times[start]), float(times[i - 1])))
            start = None
    if start is not None:
        windows.append((float(times[start]), float(times[-1])))
    return windows


def max_abs_deviation(theory: Trajectory, simulation: Trajectory,
                      columns: Sequence[str], time_tol: float = 1e-9) -> Dict[str, float]:
    """
    Largest |theory - simulation| per column over records at matching times.

    Raises:
        ValidationError: If the two trajectories share no record time
    """
    theory_times = theory.times()
    sim_times = simulation.times()
    pairs = [
        (i, j) for i, t in enumerate(theory_times)
        for j in np.flatnonzero(np.abs(sim_times - t) <= time_tol)[:1]
    ]
    if not pairs:
        raise ValidationError("theory and simulation records share no time")
    rows_t, rows_s = (np.array(index) for index in zip(*pairs))
    return {
        name: float(np.max(np.abs(theory.column(name)[rows_t] - simulation.column(name)[rows_s])))
        for name in columns
    }
