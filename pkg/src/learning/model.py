"""
Model - Machines, update magnitudes and order-parameter types.

Three perceptrons share every input x:
- the true teacher A, fixed, with the nonmonotonic output sgn((y-a)y(y+a))
- the moving teacher B, trained by perceptron learning on A's outputs
- the student J, trained by perceptron learning on B's outputs

Their internal potentials y, v, u are jointly Gaussian with unit
variances; the three direction cosines are the off-diagonal entries of
that covariance. Sign conventions: sgn(0) = +1 and step(0) = 1.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import InfeasibleStateError, ValidationError
from ..core.events import EventSystem, RunEvent
from ..core.settings import FEASIBILITY_TOL, MONOTONE_THRESHOLD
from ..numerics.gaussmath import squeeze_scalar

logger = logging.getLogger(__name__)


# =============================================================================
# TYPES
# =============================================================================

@dataclass(frozen=True)
class ModelParams:
    """Static scalars of the system."""

    a: float
    """Threshold of the true teacher's nonmonotonic output."""

    eta_b: float
    """Learning rate of the moving teacher."""

    eta_j: float
    """Learning rate of the student."""

    def __post_init__(self):
        for name in ("a", "eta_b", "eta_j"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValidationError(f"{name} must be > 0, got {value}")
        if self.monotone_regime:
            logger.warning(
                f"a={self.a:g} >= sqrt(2 ln 2): generalization error is monotone in R"
            )

    @property
    def monotone_regime(self) -> bool:
        """True when a >= sqrt(2 ln 2)."""
        return self.a >= MONOTONE_THRESHOLD


@dataclass(frozen=True)
class MacroState:
    """The five order parameters at one time."""

    r_b: float
    """Direction cosine between A and B."""

    r_j: float
    """Direction cosine between A and J."""

    r_bj: float
    """Direction cosine between B and J."""

    l_b: float
    """Length of the moving teacher, |B| / sqrt(N)."""

    l_j: float
    """Length of the student, |J| / sqrt(N)."""

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise InfeasibleStateError(f"non-finite order parameters {values.tolist()}")
        for name in ("r_b", "r_j", "r_bj"):
            if abs(getattr(self, name)) > 1.0 + FEASIBILITY_TOL:
                raise InfeasibleStateError(f"{name}={getattr(self, name)!r} outside [-1, 1]")
        if not (self.l_b > 0 and self.l_j > 0):
            raise InfeasibleStateError(f"lengths must be > 0, got l_b={self.l_b}, l_j={self.l_j}")

    def gram_determinant(self) -> float:
        """Determinant of the covariance of (y, v, u)."""
        rb, rj, rbj = self.r_b, self.r_j, self.r_bj
        return 1.0 + 2.0 * rb * rj * rbj - rb * rb - rj * rj - rbj * rbj

    def as_array(self) -> np.ndarray:
        """Order parameters as (R_B, R_J, R_BJ, l_B, l_J)."""
        return np.array([self.r_b, self.r_j, self.r_bj, self.l_b, self.l_j], dtype=float)

    @classmethod
    def from_array(cls, values: ArrayLike) -> "MacroState":
        r_b, r_j, r_bj, l_b, l_j = (float(v) for v in values)
        return cls(r_b=r_b, r_j=r_j, r_bj=r_bj, l_b=l_b, l_j=l_j)


@dataclass(frozen=True, eq=False)
class Covariance3:
    """
    Covariance of (y, v, u):

        | 1     R_B    R_J  |
        | R_B   1      R_BJ |
        | R_J   R_BJ   1    |
    """
    matrix: np.ndarray

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def factor(self) -> np.ndarray:
        """
        Return L with L @ L.T equal to the matrix.

        Cholesky when the matrix is positive definite; a symmetric
        eigen-factor when it is only semidefinite (degenerate states).
        """
        try:
            return np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            eigenvalues, vectors = np.linalg.eigh(self.matrix)
            if eigenvalues.min() < -FEASIBILITY_TOL:
                raise InfeasibleStateError(
                    f"covariance not positive semidefinite (min eigenvalue {eigenvalues.min():.3g})"
                )
            return vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


# =============================================================================
# MACHINES
# =============================================================================

def _sgn(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0, -1.0)


def _step(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0, 0.0)


def true_teacher_output(y: ArrayLike, a: float):
    """
    Output d = sgn((y-a) y (y+a)) of the true teacher.

    +1 on [-a, 0] and [a, inf), -1 on (-inf, -a) and (0, a).
    """
    y = np.asarray(y, dtype=float)
    return squeeze_scalar(_sgn((y - a) * y * (y + a)))


def g_magnitude(y: ArrayLike, v: ArrayLike, params: ModelParams):
    """Moving-teacher update eta_B * step(-v d) * d; one of -eta_B, 0, +eta_B."""
    d = np.asarray(true_teacher_output(y, params.a))
    v = np.asarray(v, dtype=float)
    return squeeze_scalar(params.eta_b * _step(-v * d) * d)


def f_magnitude(u: ArrayLike, v: ArrayLike, eta_j: float):
    """Student update eta_J * step(-u v) * sgn(v); one of -eta_J, 0, +eta_J."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return squeeze_scalar(eta_j * _step(-u * v) * _sgn(v))


# =============================================================================
# COVARIANCE
# =============================================================================

def _clamp_to_psd(matrix: np.ndarray) -> np.ndarray:
    """Nearest unit-diagonal PSD matrix by eigenvalue clipping."""
    eigenvalues, vectors = np.linalg.eigh(matrix)
    clipped = (vectors * np.clip(eigenvalues, 0.0, None)) @ vectors.T
    scale = np.sqrt(np.diag(clipped))
    clamped = clipped / np.outer(scale, scale)
    return 0.5 * (clamped + clamped.T)


def build_covariance(state: MacroState) -> Covariance3:
    """
    Build the covariance of (y, v, u) at a state.

    A Gram determinant in [-FEASIBILITY_TOL, 0) is round-off: the matrix is
    clamped to the PSD cone and a warning is logged. Anything more negative
    is an error.

    Raises:
        InfeasibleStateError: If the Gram determinant is below -FEASIBILITY_TOL
    """
    det = state.gram_determinant()
    if det < -FEASIBILITY_TOL:
        raise InfeasibleStateError(
            f"infeasible order parameters R_B={state.r_b:.6g}, R_J={state.r_j:.6g}, "
            f"R_BJ={state.r_bj:.6g} (Gram determinant {det:.3g})"
        )

    rb, rj, rbj = (float(np.clip(r, -1.0, 1.0)) for r in (state.r_b, state.r_j, state.r_bj))
    matrix = np.array([
        [1.0, rb, rj],
        [rb, 1.0, rbj],
        [rj, rbj, 1.0],
    ])

    if det < 0:
        logger.warning(f"clamping covariance with Gram determinant {det:.3g} to the PSD cone")
        EventSystem.emit(RunEvent.FEASIBILITY_CLAMPED, {"determinant": det})
        matrix = _clamp_to_psd(matrix)

    matrix.setflags(write=False)
    return Covariance3(matrix)
