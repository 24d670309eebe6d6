"""
Averages - The nine sample averages that drive the order-parameter ODEs.

With g the moving teacher's update magnitude and f the student's, all
expectations run over the trivariate normal (y, v, u) whose covariance
holds R_B, R_J, R_BJ. Eight of them have closed forms; <gf> needs a
nested quadrature. A brute-force Monte Carlo oracle validates them all.

Resolved forms (see docs/NUMERICS.md):
- <f^2> = eta_J^2 arccos(R_BJ) / pi, continuous through R_BJ = 0.
- <g^2> = eta_B^2 eg(R_B, a).
- <gf>  = -eta_B eta_J P[v d < 0, u d > 0]
        = -2 eta_B eta_J [int_0^a Dy I(y) + int_-oo^-a Dy I(y)],
  I(y)  = int_{-R_B y / s_B}^oo Dz H((R_J s_B y + (R_BJ - R_B R_J) z) / sqrt(det)),
  with s_B = sqrt(1 - R_B^2) and det the Gram determinant.
"""

import logging
import math
from dataclasses import dataclass, fields
from typing import Callable, Dict, List, Tuple

import numpy as np

from ..core.errors import ValidationError
from ..core.events import EventSystem, RunEvent
from ..core.settings import (
    DEGENERATE_DET, GF_FALLBACK_SAMPLES, GF_FALLBACK_SEED,
    ORACLE_BAND_SE, ORACLE_CHUNK, ORACLE_GF_FLOOR, ORACLE_MIN_SAMPLES
)
from ..numerics.gaussmath import (
    DEFAULT_QUADRATURE, SQRT_2PI, QuadratureSpec,
    h_tail, integrate_1d, integrate_1d_batch, std_normal_density
)
from ..utils.rng import Stream, make_generator
from .generalization import gen_error
from .model import (
    Covariance3, MacroState, ModelParams,
    build_covariance, f_magnitude, g_magnitude
)

logger = logging.getLogger(__name__)

PotentialFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AveragesSet:
    """The nine expectations at one state."""
    gv: float
    g2: float
    fu: float
    f2: float
    gu: float
    fv: float
    gf: float
    fy: float
    gy: float

    def as_dict(self) -> Dict[str, float]:
        return {field.name: getattr(self, field.name) for field in fields(self)}


AVERAGE_NAMES = tuple(field.name for field in fields(AveragesSet))


def _tilt(a: float) -> float:
    """2 exp(-a^2/2) - 1, i.e. sqrt(pi/2) E[y d(y)]."""
    return 2.0 * math.exp(-0.5 * a * a) - 1.0


# =============================================================================
# CLOSED FORMS
# =============================================================================

def avg_gv(state: MacroState, params: ModelParams) -> float:
    """<gv> = eta_B / sqrt(2 pi) * (R_B (2 exp(-a^2/2) - 1) - 1)."""
    return params.eta_b / SQRT_2PI * (state.r_b * _tilt(params.a) - 1.0)


def avg_g2(state: MacroState, params: ModelParams,
           spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """<g^2> = eta_B^2 times the moving teacher's generalization error."""
    return params.eta_b ** 2 * gen_error(state.r_b, params.a, spec).value


def avg_fu(state: MacroState, params: ModelParams) -> float:
    """<fu> = eta_J (R_BJ - 1) / sqrt(2 pi)."""
    return params.eta_j * (state.r_bj - 1.0) / SQRT_2PI


def avg_fv(state: MacroState, params: ModelParams) -> float:
    """<fv> = eta_J (1 - R_BJ) / sqrt(2 pi)."""
    return -avg_fu(state, params)


def avg_f2(state: MacroState, params: ModelParams) -> float:
    """<f^2> = eta_J^2 arccos(R_BJ) / pi."""
    return params.eta_j ** 2 * math.acos(float(np.clip(state.r_bj, -1.0, 1.0))) / math.pi


def avg_gu(state: MacroState, params: ModelParams) -> float:
    """<gu> = eta_B / sqrt(2 pi) * (R_J (2 exp(-a^2/2) - 1) - R_BJ)."""
    return params.eta_b / SQRT_2PI * (state.r_j * _tilt(params.a) - state.r_bj)


def avg_fy(state: MacroState, params: ModelParams) -> float:
    """<fy> = eta_J (R_B - R_J) / sqrt(2 pi)."""
    return params.eta_j * (state.r_b - state.r_j) / SQRT_2PI


def avg_gy(state: MacroState, params: ModelParams) -> float:
    """<gy> = eta_B / sqrt(2 pi) * (2 exp(-a^2/2) - 1 - R_B)."""
    return params.eta_b / SQRT_2PI * (_tilt(params.a) - state.r_b)


# =============================================================================
# <gf> BY NESTED QUADRATURE
# =============================================================================

def _disagreement_given_y(y: np.ndarray, state: MacroState, det: float,
                          spec: QuadratureSpec) -> np.ndarray:
    """
    P(v > 0, u < 0 | y) for every y, by batched inner quadrature.

    The inner integrand steps where its H argument crosses zero, over a
    layer of half-width infinite_cutoff / |slope|. Near-degenerate states
    make that layer far narrower than a panel, so each row is cut at the
    centre and both edges of the layer; outside it H is 0 or 1 to
    working precision.
    """
    s_b = math.sqrt(1.0 - state.r_b ** 2)
    root = math.sqrt(det)
    offset = state.r_j * s_b * y / root
    slope = (state.r_bj - state.r_b * state.r_j) / root

    hi = np.full_like(y, spec.infinite_cutoff, dtype=float)
    lo = np.minimum(-state.r_b * y / s_b, hi)
    bounds = [lo]
    if slope != 0.0:
        centre = -offset / slope
        layer = spec.infinite_cutoff / abs(slope)
        bounds += [np.clip(centre + shift, lo, hi) for shift in (-layer, 0.0, layer)]
    bounds.append(hi)

    offset_rows = offset[:, None]

    def integrand(z: np.ndarray) -> np.ndarray:
        return std_normal_density(z) * h_tail(offset_rows + slope * z)

    pieces = [integrate_1d_batch(integrand, left, right, spec)
              for left, right in zip(bounds[:-1], bounds[1:])]
    return np.sum(pieces, axis=0)


def avg_gf(state: MacroState, params: ModelParams,
           spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """
    <gf> by nested quadrature over the two regions where d = -1.

    Degenerate states (Gram determinant <= DEGENERATE_DET) have no
    density for the inner integral and fall back to the oracle with a
    fixed seed.
    """
    det = state.gram_determinant()
    if det <= DEGENERATE_DET:
        logger.warning(f"degenerate covariance (det={det:.3g}); <gf> from the oracle")
        EventSystem.emit(RunEvent.ORACLE_FALLBACK, {"average": "gf", "determinant": det})
        mean, _ = oracle_average(
            lambda y, v, u: g_magnitude(y, v, params) * f_magnitude(u, v, params.eta_j),
            build_covariance(state), GF_FALLBACK_SAMPLES, GF_FALLBACK_SEED,
        )
        return mean

    def outer(y: np.ndarray) -> np.ndarray:
        return std_normal_density(y) * _disagreement_given_y(y, state, det, spec)

    middle = integrate_1d(outer, 0.0, params.a, spec)
    tail = integrate_1d(outer, -math.inf, -params.a, spec)
    return -2.0 * params.eta_b * params.eta_j * (middle.value + tail.value)


def compute_all(state: MacroState, params: ModelParams,
                spec: QuadratureSpec = DEFAULT_QUADRATURE) -> AveragesSet:
    """All nine averages at one state."""
    build_covariance(state)
    return AveragesSet(
        gv=avg_gv(state, params),
        g2=avg_g2(state, params, spec),
        fu=avg_fu(state, params),
        f2=avg_f2(state, params),
        gu=avg_gu(state, params),
        fv=avg_fv(state, params),
        gf=avg_gf(state, params, spec),
        fy=avg_fy(state, params),
        gy=avg_gy(state, params),
    )


# =============================================================================
# ORACLE
# =============================================================================

def oracle_average(fn: PotentialFunction, cov: Covariance3, n_samples: int,
                   seed: int, chunk: int = ORACLE_CHUNK) -> Tuple[float, float]:
    """
    Monte Carlo estimate of E[fn(y, v, u)].

    Samples are drawn in chunks through a triangular factor of cov, so
    memory stays bounded; the result depends only on (seed, n_samples,
    chunk).

    Returns:
        (sample mean, standard error of the mean)

    Raises:
        ValidationError: If n_samples < ORACLE_MIN_SAMPLES
        InfeasibleStateError: If cov cannot be factorised
    """
    if n_samples < ORACLE_MIN_SAMPLES:
        raise ValidationError(f"oracle needs at least {ORACLE_MIN_SAMPLES} samples, got {n_samples}")

    factor = cov.factor()
    rng = make_generator(seed, 0, Stream.ORACLE)

    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining:
        size = min(chunk, remaining)
        y, v, u = factor @ rng.standard_normal((3, size))
        values = np.broadcast_to(np.asarray(fn(y, v, u), dtype=float), (size,))
        total += float(values.sum())
        total_sq += float(np.dot(values, values))
        remaining -= size

    mean = total / n_samples
    variance = max(total_sq / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return mean, math.sqrt(variance / n_samples)


def oracle_averages(state: MacroState, params: ModelParams, n_samples: int,
                    seed: int, chunk: int = ORACLE_CHUNK) -> Dict[str, Tuple[float, float]]:
    """
    All nine averages from one shared sample.

    Returns:
        Mapping of average name to (mean, standard error)
    """
    if n_samples < ORACLE_MIN_SAMPLES:
        raise ValidationError(f"oracle needs at least {ORACLE_MIN_SAMPLES} samples, got {n_samples}")

    factor = build_covariance(state).factor()
    rng = make_generator(seed, 0, Stream.ORACLE)

    totals = dict.fromkeys(AVERAGE_NAMES, 0.0)
    squares = dict.fromkeys(AVERAGE_NAMES, 0.0)
    remaining = n_samples
    while remaining:
        size = min(chunk, remaining)
        y, v, u = factor @ rng.standard_normal((3, size))
        g = g_magnitude(y, v, params)
        f = f_magnitude(u, v, params.eta_j)
        samples = {
            "gv": g * v, "g2": g * g, "fu": f * u, "f2": f * f, "gu": g * u,
            "fv": f * v, "gf": g * f, "fy": f * y, "gy": g * y,
        }
        for name, values in samples.items():
            totals[name] += float(values.sum())
            squares[name] += float(np.dot(values, values))
        remaining -= size

    estimates = {}
    for name in AVERAGE_NAMES:
        mean = totals[name] / n_samples
        variance = max(squares[name] / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
        estimates[name] = (mean, math.sqrt(variance / n_samples))
    return estimates


def oracle_band(name: str, standard_error: float) -> float:
    """Acceptance half-width for comparing a closed form with its oracle."""
    band = ORACLE_BAND_SE * standard_error
    if name == "gf":
        band = max(ORACLE_GF_FLOOR, band)
    return band


def random_states(count: int, seed: int) -> List[MacroState]:
    """
    Feasible states drawn as cosines between three random directions in R^3.

    Gram matrices of actual vectors are positive semidefinite, so every
    draw is feasible. Lengths are uniform on [0.5, 2].
    """
    rng = make_generator(seed, 0, Stream.INIT)
    states = []
    for _ in range(count):
        vectors = rng.standard_normal((3, 3))
        vectors /= np.linalg.norm(vectors, axis=1, keepdims=True)
        gram = np.clip(vectors @ vectors.T, -1.0, 1.0)
        l_b, l_j = rng.uniform(0.5, 2.0, size=2)
        states.append(MacroState(
            r_b=float(gram[0, 1]), r_j=float(gram[0, 2]), r_bj=float(gram[1, 2]),
            l_b=float(l_b), l_j=float(l_j),
        ))
    return states
