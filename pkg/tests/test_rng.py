"""Tests for seeded random streams."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.utils.rng import Stream, make_generator


class TestMakeGenerator:

    @settings(max_examples=25)
    @given(seed=st.integers(min_value=0, max_value=2**64 - 1), trial=st.integers(0, 1000))
    def test_reproducible(self, seed, trial):
        first = make_generator(seed, trial, Stream.TRAIN).standard_normal(4)
        second = make_generator(seed, trial, Stream.TRAIN).standard_normal(4)
        np.testing.assert_array_equal(first, second)

    def test_streams_are_distinct(self):
        draws = [make_generator(11, 0, stream).standard_normal(8) for stream in Stream]
        for i in range(len(draws)):
            for j in range(i + 1, len(draws)):
                assert not np.array_equal(draws[i], draws[j])

    def test_trials_are_distinct(self):
        first = make_generator(11, 0, Stream.TRAIN).standard_normal(8)
        second = make_generator(11, 1, Stream.TRAIN).standard_normal(8)
        assert not np.array_equal(first, second)

    def test_test_draws_do_not_shift_training_draws(self):
        expected = make_generator(5, 2, Stream.TRAIN).standard_normal(16)
        make_generator(5, 2, Stream.TEST).standard_normal(100_000)
        np.testing.assert_array_equal(make_generator(5, 2, Stream.TRAIN).standard_normal(16), expected)

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            make_generator(-1)
        with pytest.raises(ValueError):
            make_generator(1, trial=-2)
