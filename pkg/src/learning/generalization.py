"""
Generalization - Error of a sign perceptron against the nonmonotonic teacher.

For a machine whose potential w has correlation R with the true teacher's
potential y, the generalization error is the probability that
sgn(w) disagrees with d = sgn((y-a)y(y+a)):

    eg(R, a) = 2 [ int_0^a  Dy H(-R y / sqrt(1-R^2))
                 + int_a^oo Dy H( R y / sqrt(1-R^2)) ]

The factor 2 folds in the y < 0 half by the symmetry (y, w) -> (-y, -w).
At R = +-1 the integrand degenerates to an indicator and the limits are
used directly: eg(1, a) = 1 - 2 H(a) and eg(-1, a) = 2 H(a).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import optimize

from ..core.errors import ValidationError
from ..core.settings import FEASIBILITY_TOL, MONOTONE_THRESHOLD, SINGULAR_COSINE_EPS
from ..numerics.gaussmath import (
    DEFAULT_QUADRATURE, QuadratureSpec, h_tail, integrate_1d, std_normal_density
)
from .model import true_teacher_output

logger = logging.getLogger(__name__)

TWO_LN_2 = 2.0 * math.log(2.0)


@dataclass(frozen=True)
class GenErrorResult:
    """Generalization error with the quadrature error bound behind it."""
    value: float
    quadrature_abs_err: float


def _check_cosine(r: float) -> float:
    if not (np.isfinite(r) and abs(r) <= 1.0 + FEASIBILITY_TOL):
        raise ValidationError(f"direction cosine must lie in [-1, 1], got {r}")
    return float(np.clip(r, -1.0, 1.0))


def _check_threshold(a: float) -> float:
    if not (np.isfinite(a) and a > 0):
        raise ValidationError(f"threshold a must be > 0, got {a}")
    return float(a)


def gen_error(r: float, a: float, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> GenErrorResult:
    """
    Generalization error of a sign perceptron with direction cosine r.

    Args:
        r: Direction cosine with the true teacher, in [-1, 1]
        a: Threshold of the true teacher
        spec: Quadrature policy

    Returns:
        GenErrorResult with value in [0, 1]

    Raises:
        ValidationError: On r outside [-1, 1] or a <= 0
        QuadratureError: If the quadrature does not converge
    """
    r = _check_cosine(r)
    a = _check_threshold(a)

    s = math.sqrt(max(0.0, 1.0 - r * r))
    if s < SINGULAR_COSINE_EPS:
        value = 1.0 - 2.0 * h_tail(a) if r > 0 else 2.0 * h_tail(a)
        return GenErrorResult(value=value, quadrature_abs_err=0.0)

    slope = r / s
    inner = integrate_1d(lambda y: std_normal_density(y) * h_tail(-slope * y), 0.0, a, spec)
    outer = integrate_1d(lambda y: std_normal_density(y) * h_tail(slope * y), a, math.inf, spec)

    value = 2.0 * (inner.value + outer.value)
    return GenErrorResult(
        value=float(np.clip(value, 0.0, 1.0)),
        quadrature_abs_err=2.0 * (inner.abs_err + outer.abs_err),
    )


def monotone_regime(a: float) -> bool:
    """True when a >= sqrt(2 ln 2): eg no longer dips on [0, 1]."""
    return _check_threshold(a) >= MONOTONE_THRESHOLD


def optimal_r(a: float) -> float:
    """
    Direction cosine in [0, 1] that minimises the generalization error.

    sqrt((2 ln 2 - a^2) / (2 ln 2)) for a < sqrt(2 ln 2). At and beyond the
    threshold eg is non-decreasing on [0, 1] and the minimiser is 0, which
    is the closed form clamped at zero.
    """
    a = _check_threshold(a)
    if monotone_regime(a):
        logger.warning(f"a={a:g} is in the monotone regime; eg is non-decreasing on [0, 1]")
    return math.sqrt(max(0.0, (TWO_LN_2 - a * a) / TWO_LN_2))


def argmin_gen_error(a: float, lo: float = 0.0, hi: float = 1.0,
                     xatol: float = 1e-6,
                     spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Numerical minimiser of gen_error(., a) on [lo, hi]."""
    a = _check_threshold(a)
    result = optimize.minimize_scalar(
        lambda r: gen_error(r, a, spec).value,
        bounds=(_check_cosine(lo), _check_cosine(hi)),
        method="bounded",
        options={"xatol": xatol},
    )
    logger.debug(f"argmin of eg at a={a:g}: R={result.x:.6f} ({result.nfev} evaluations)")
    return float(result.x)


def gen_error_curve(a: float, grid: Sequence[float],
                    spec: QuadratureSpec = DEFAULT_QUADRATURE) -> List[Tuple[float, float]]:
    """Tabulate (R, eg) over a grid, in grid order."""
    return [(float(r), gen_error(r, a, spec).value) for r in grid]


def empirical_gen_error(r: float, a: float, n_samples: int,
                        rng: np.random.Generator) -> Tuple[float, float]:
    """
    Count sign mismatches on correlated normal pairs.

    Returns:
        (mismatch rate, standard error)
    """
    r = _check_cosine(r)
    a = _check_threshold(a)
    y = rng.standard_normal(n_samples)
    w = r * y + math.sqrt(max(0.0, 1.0 - r * r)) * rng.standard_normal(n_samples)
    d = true_teacher_output(y, a)
    mismatches = d * np.where(w >= 0, 1.0, -1.0) < 0
    rate = float(np.mean(mismatches))
    return rate, math.sqrt(rate * (1.0 - rate) / n_samples)
