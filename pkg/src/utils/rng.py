"""
Seeded random streams for reproducible runs.

Every (seed, trial, purpose) triple gets its own numpy Generator, so
changing how many test inputs a run draws never perturbs its training
inputs, and trial k of a run is the same whether it ran alone or in a pool.

Reproducibility holds per (seed, trial, stream, numpy PCG64 version).
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Purpose of a random stream."""
    INIT = 0
    TRAIN = 1
    TEST = 2
    ORACLE = 3


def make_generator(seed: int, trial: int = 0, stream: Stream = Stream.INIT) -> np.random.Generator:
    """
    Build the generator for one (seed, trial, stream) triple.

    Args:
        seed: 64-bit run seed
        trial: Trial index
        stream: Purpose of the draws

    Returns:
        numpy Generator instance
    """
    if seed < 0 or trial < 0:
        raise ValueError(f"seed and trial must be non-negative, got {seed}, {trial}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(trial, int(stream)))
    return np.random.Generator(np.random.PCG64(sequence))
