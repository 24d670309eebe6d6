"""
Utility Modules - Helpers and common utilities.
"""

from .timer import Stopwatch, timed
from .rng import Stream, make_generator

__all__ = ["Stopwatch", "timed", "Stream", "make_generator"]
