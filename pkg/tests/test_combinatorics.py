#!/usr/bin/env python

"""Tests for `pykoszul.combinatorics`."""

from collections import Counter
from math import comb

import pytest

from pykoszul.combinatorics import (
    doubling_complex,
    n_chi,
    n_chi_via_complexes,
    occurrence_count,
    y_sequence,
)
from pykoszul.complexes import cohomology
from pykoszul.const import MATERIALIZE_LIMIT


class TestYSequence:
    def test_y_sequence_small(self):
        assert y_sequence(0).entries == (0,)
        assert y_sequence(1).entries == (1, 0)
        assert y_sequence(2).entries == (2, 1, 1, 0)
        assert len(y_sequence(5)) == 32

    def test_y_sequence_raises_exception_on_invalid_value(self):
        with pytest.raises(ValueError):
            y_sequence(-1)
        with pytest.raises(ValueError) as excinfo:
            y_sequence(MATERIALIZE_LIMIT + 1)
        assert "too long" in str(excinfo.value)

    def test_occurrences_are_binomial(self):
        for n in range(21):
            counts = Counter(y_sequence(n).entries)
            for k in range(n + 1):
                assert counts[k] == comb(n, k)
                assert occurrence_count(k, n) == comb(n, k)

    def test_occurrence_count_beyond_materialize_limit(self):
        assert occurrence_count(3, 40) == comb(40, 3)
        assert occurrence_count(41, 40) == 0


class TestNChi:
    def test_n_chi(self):
        assert n_chi(1) == 1
        for d in range(2, 12):
            assert n_chi(d) == 0

    def test_n_chi_via_complexes(self):
        for d in range(1, 8):
            assert n_chi_via_complexes(d) == n_chi(d)

    def test_n_chi_raises_exception_on_invalid_value(self):
        with pytest.raises(ValueError):
            n_chi(0)
        with pytest.raises(ValueError):
            n_chi_via_complexes(0)

    def test_doubling_complex_dims(self):
        c = doubling_complex(4)
        assert cohomology(c).dims_list(0, 4) == [1, 4, 6, 4, 1]
