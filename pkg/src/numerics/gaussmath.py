"""
Gaussian Math - Scalar Gaussian primitives and 1-D quadrature.

Every other module builds on these: the standard normal density, its
upper tail H(u), and adaptive Gauss-Legendre quadrature with
semi-infinite ranges truncated a fixed number of standard deviations out.

Integrands are vectorised: they receive an ndarray of abscissae and
return an ndarray of the same shape.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.typing import ArrayLike
from scipy import special

from ..core.errors import QuadratureError, ValidationError
from ..core.settings import (
    QUAD_ABS_TOL, QUAD_MAX_SUBDIVISIONS, QUAD_INFINITE_CUTOFF,
    QUAD_MIN_CUTOFF, QUAD_PANEL_ORDER
)

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)
SQRT_2 = math.sqrt(2.0)

Integrand = Callable[[np.ndarray], ArrayLike]


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy policy of a quadrature call."""

    abs_tol: float = QUAD_ABS_TOL
    """Target absolute error of the whole integral."""

    max_subdivisions: int = QUAD_MAX_SUBDIVISIONS
    """Panel splits allowed before giving up."""

    infinite_cutoff: float = QUAD_INFINITE_CUTOFF
    """Truncation point, in standard deviations, of semi-infinite ranges."""

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValidationError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValidationError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")
        if not self.infinite_cutoff >= QUAD_MIN_CUTOFF:
            raise ValidationError(
                f"infinite_cutoff must be >= {QUAD_MIN_CUTOFF}, got {self.infinite_cutoff}"
            )


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class Quadrature:
    """Result of integrate_1d."""
    value: float
    abs_err: float
    panels: int

    def __float__(self) -> float:
        return self.value


def squeeze_scalar(result: np.ndarray):
    """Return a plain float for scalar input, the array otherwise."""
    return float(result) if np.ndim(result) == 0 else result


def std_normal_density(y: ArrayLike):
    """Standard normal density exp(-y^2/2)/sqrt(2 pi)."""
    y = np.asarray(y, dtype=float)
    return squeeze_scalar(np.exp(-0.5 * y * y) / SQRT_2PI)


def h_tail(u: ArrayLike):
    """
    Upper-tail probability H(u) of the standard normal.

    Evaluated through erfc, so large |u| keeps full relative accuracy;
    u = +inf gives 0 and u = -inf gives 1.
    """
    u = np.asarray(u, dtype=float)
    return squeeze_scalar(0.5 * special.erfc(u / SQRT_2))


@lru_cache(maxsize=None)
def _legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel_sums(f: Integrand, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Gauss-Legendre estimate on every panel [lo_i, hi_i] with one call of f."""
    nodes, weights = _legendre_rule(QUAD_PANEL_ORDER)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    fx = np.broadcast_to(np.asarray(f(x.ravel()), dtype=float), (x.size,)).reshape(x.shape)
    return half * (fx @ weights)


def _truncate(lo: float, hi: float, cutoff: float) -> Tuple[float, float]:
    if math.isinf(lo):
        lo = -cutoff if lo < 0 else cutoff
    if math.isinf(hi):
        hi = cutoff if hi > 0 else -cutoff
    return lo, hi


def integrate_1d(f: Integrand, lo: float, hi: float,
                 spec: QuadratureSpec = DEFAULT_QUADRATURE) -> Quadrature:
    """
    Integrate f over (lo, hi) by adaptive Gauss-Legendre subdivision.

    A panel is accepted when its single-rule estimate and the sum over its
    two halves agree to the panel's share of abs_tol. All panels of one
    refinement level are evaluated in a single vectorised call.

    Args:
        f: Vectorised integrand
        lo: Lower limit, may be -inf
        hi: Upper limit, may be +inf
        spec: Accuracy policy

    Returns:
        Quadrature with the value, the accumulated error estimate and the
        number of accepted panels

    Raises:
        ValidationError: If lo >= hi or a limit is NaN
        QuadratureError: If the subdivision budget runs out
    """
    if math.isnan(lo) or math.isnan(hi) or not lo < hi:
        raise ValidationError(f"integration range must satisfy lo < hi, got ({lo}, {hi})")

    lo, hi = _truncate(lo, hi, spec.infinite_cutoff)
    if lo >= hi:
        return Quadrature(0.0, 0.0, 0)

    total_width = hi - lo
    active_lo = np.array([lo])
    active_hi = np.array([hi])
    coarse = _panel_sums(f, active_lo, active_hi)

    accepted_values = []
    accepted_errors = []
    splits = 0

    while active_lo.size:
        mid = 0.5 * (active_lo + active_hi)
        halves = _panel_sums(f, np.concatenate([active_lo, mid]), np.concatenate([mid, active_hi]))
        left, right = halves[:active_lo.size], halves[active_lo.size:]
        fine = left + right
        error = np.abs(fine - coarse)
        budget = spec.abs_tol * (active_hi - active_lo) / total_width
        done = error <= budget

        accepted_values.extend(fine[done])
        accepted_errors.extend(error[done])

        todo = ~done
        splits += int(np.count_nonzero(todo))
        if splits > spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence on ({lo:.6g}, {hi:.6g}) after {spec.max_subdivisions} "
                f"subdivisions (abs_tol={spec.abs_tol:g})"
            )

        active_lo = np.concatenate([active_lo[todo], mid[todo]])
        active_hi = np.concatenate([mid[todo], active_hi[todo]])
        coarse = np.concatenate([left[todo], right[todo]])

    return Quadrature(
        value=math.fsum(accepted_values),
        abs_err=math.fsum(accepted_errors),
        panels=len(accepted_values),
    )


def _composite_sums(f: Callable[[np.ndarray], ArrayLike], lo: np.ndarray,
                    width: np.ndarray, panels: int) -> np.ndarray:
    nodes, weights = _legendre_rule(QUAD_PANEL_ORDER)
    half = width / (2 * panels)
    starts = lo[:, None] + width[:, None] * (np.arange(panels)[None, :] / panels)
    mids = starts + half[:, None]
    x = (mids[:, :, None] + half[:, None, None] * nodes[None, None, :]).reshape(lo.size, -1)
    fx = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape).reshape(lo.size, panels, -1)
    return half * np.einsum("rpk,k->r", fx, weights)


def integrate_1d_batch(f: Callable[[np.ndarray], ArrayLike], lo: ArrayLike, hi: ArrayLike,
                       spec: QuadratureSpec = DEFAULT_QUADRATURE) -> np.ndarray:
    """
    Integrate many rows of one integrand family at once.

    Row i integrates over (lo[i], hi[i]); f receives a 2-D array whose
    row i holds abscissae of integral i and must return the same shape.
    Rows with hi <= lo contribute 0. The panel count is doubled for all
    rows together until every row changes by at most abs_tol.

    Raises:
        QuadratureError: If the panel count would exceed max_subdivisions
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    cutoff = spec.infinite_cutoff
    lo = np.where(np.isinf(lo), np.sign(lo) * cutoff, lo).ravel()
    hi = np.where(np.isinf(hi), np.sign(hi) * cutoff, hi).ravel()
    width = np.clip(hi - lo, 0.0, None)

    panels = 2
    previous = _composite_sums(f, lo, width, panels)
    while True:
        panels *= 2
        if panels > spec.max_subdivisions:
            raise QuadratureError(
                f"batch quadrature did not converge with {spec.max_subdivisions} panels "
                f"(abs_tol={spec.abs_tol:g})"
            )
        current = _composite_sums(f, lo, width, panels)
        if lo.size == 0 or np.max(np.abs(current - previous)) <= spec.abs_tol:
            logger.debug(f"batch quadrature of {lo.size} rows converged with {panels} panels")
            return current
        previous = current
