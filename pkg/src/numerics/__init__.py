"""
Numerics package - Gaussian primitives and quadrature.
"""

from .gaussmath import (
    QuadratureSpec, Quadrature, DEFAULT_QUADRATURE,
    std_normal_density, h_tail, integrate_1d, integrate_1d_batch
)
