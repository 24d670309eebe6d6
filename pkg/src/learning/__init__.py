"""
Learning package - Moving-teacher perceptron dynamics, in theory and simulation.
"""

from .model import ModelParams, MacroState, Covariance3, build_covariance
from .generalization import gen_error, optimal_r, argmin_gen_error
from .averages import AveragesSet, compute_all, oracle_averages
from .theory import Trajectory, TrajectoryRecord, standard_init, rhs, rk4_step, integrate
from .simulator import MicroState, SimConfig, SimulationResult, run_trial, run_simulation
