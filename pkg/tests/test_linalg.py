#!/usr/bin/env python

"""Tests for `pykoszul.linalg`."""

import random
from fractions import Fraction

import pytest

from pykoszul.exc import FieldMismatchError, UnsupportedAutomorphismError
from pykoszul.field import gf, rationals
from pykoszul.generate import random_matrix
from pykoszul.linalg import (
    Mat,
    field_automorphism,
    inverse,
    rank_profile,
    solve_linear,
    span_dim,
)


class TestMat:
    def test_Mat_raises_exception_on_invalid_value(self):
        with pytest.raises(TypeError) as excinfo:
            Mat("gf:5", 1, 1)
        assert "Invalid FieldSpec" in str(excinfo.value)

        with pytest.raises(ValueError) as excinfo:
            Mat(gf(5), 2, 2, [[1, 2]])
        assert "2x2" in str(excinfo.value)

    def test_Mat_from_entries(self):
        f = rationals()
        m = Mat.from_entries(f, [["1/2", 1], [0, Fraction(3)]])
        assert m.raw(0, 0) == Fraction(1, 2)
        assert m.shape == (2, 2)
        assert str(m) == "[[1/2, 1], [0, 3]]"

    def test_Mat_from_scalars_raises_exception_on_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            Mat.from_scalars([[gf(5).scalar(1), gf(7).scalar(1)]])

    def test_Mat_arithmetic(self):
        f = gf(5)
        a = Mat.from_entries(f, [[1, 2], [3, 4]])
        b = Mat.identity(f, 2)
        assert a @ b == a
        assert a + a == a.scale(2)
        assert (a - a).is_zero()
        assert -a == a.scale(4)
        assert a.T == Mat.from_entries(f, [[1, 3], [2, 4]])
        assert a.select(rows=[1], cols=[0]) == Mat.from_entries(f, [[3]])

    def test_Mat_raises_exception_on_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            Mat.identity(gf(5), 2) @ Mat.identity(gf(7), 2)

        with pytest.raises(ValueError):
            Mat.identity(gf(5), 2) @ Mat.identity(gf(5), 3)

    def test_Mat_block_helpers(self):
        f = gf(3)
        a = Mat.from_entries(f, [[1, 2]])
        i2 = Mat.identity(f, 2)
        assert Mat.kron(i2, a) == Mat.block_diag(f, [a, a])
        assert a.kron_identity(2) == Mat.block_diag(f, [a, a])
        assert Mat.hstack(f, 1, [a, a]).shape == (1, 4)
        assert Mat.vstack(f, 2, [a, a]).shape == (2, 2)
        blocks = Mat.from_blocks(f, [1, 2], [2], {(1, 0): i2})
        assert blocks == Mat.from_entries(f, [[0, 0], [1, 0], [0, 1]])

    def test_empty_matrices(self):
        f = gf(5)
        assert Mat.zeros(f, 0, 3) @ Mat.zeros(f, 3, 2) == Mat.zeros(f, 0, 2)
        assert (Mat.zeros(f, 2, 0) @ Mat.zeros(f, 0, 3)).is_zero()
        assert rank_profile(Mat.zeros(f, 0, 3)).kernel_basis.shape == (3, 3)


class TestRankProfile:
    @pytest.mark.parametrize("field", [rationals(), gf(2), gf(5), gf(2, 2), gf(3, 2)])
    def test_rank_nullity(self, field):
        rng = random.Random(f"rank:{field.spec_string()}")
        for _ in range(10):
            rows, cols = rng.randint(0, 5), rng.randint(1, 5)
            entries = [
                [field.random_value(rng) for _ in range(cols)] for _ in range(rows)
            ]
            m = Mat(field, rows, cols, entries)
            prof = rank_profile(m)
            assert prof.rank + prof.kernel_basis.ncols == cols
            assert (m @ prof.kernel_basis).is_zero()
            assert prof.image_basis.ncols == prof.rank
            assert span_dim(field, rows, [prof.image_basis, m]) == prof.rank

    def test_rank_over_rationals(self):
        m = Mat.from_entries(rationals(), [[1, 2, 3], [2, 4, 6], ["1/2", 0, 1]])
        assert m.rank() == 2
        assert rank_profile(m).pivot_cols == (0, 1)

    def test_rank_depends_on_characteristic(self):
        rows = [[2, 4], [1, 3]]
        assert Mat.from_entries(rationals(), rows).rank() == 2
        assert Mat.from_entries(gf(2), rows).rank() == 1

    def test_rank_profile_raises_exception_on_invalid_value(self):
        with pytest.raises(TypeError) as excinfo:
            rank_profile([[1]])
        assert "Invalid Mat" in str(excinfo.value)


class TestSolve:
    def test_solve_linear(self):
        f = gf(7)
        a = Mat.from_entries(f, [[1, 2], [3, 4]])
        b = Mat.from_entries(f, [[5], [6]])
        x = solve_linear(a, b)
        assert a @ x == b

    def test_solve_linear_inconsistent(self):
        f = rationals()
        a = Mat.from_entries(f, [[1, 1], [2, 2]])
        b = Mat.from_entries(f, [[1], [3]])
        assert solve_linear(a, b) is None

    def test_solve_linear_raises_exception_on_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            solve_linear(Mat.identity(gf(5), 1), Mat.identity(gf(7), 1))

    def test_inverse(self):
        f = gf(2, 2)
        rng = random.Random("inverse")
        for _ in range(5):
            m = random_matrix(rng, f, 3)
            inv = inverse(m)
            if m.rank() == 3:
                assert m @ inv == Mat.identity(f, 3)
            else:
                assert inv is None
        assert inverse(Mat.zeros(f, 2, 3)) is None


class TestFieldAutomorphism:
    def test_field_automorphism_on_extension(self):
        f = gf(2, 2)
        m = Mat.from_entries(f, [[(0, 1), (1, 0)]])
        sigma = field_automorphism(f, 1)
        assert sigma(m) == Mat.from_entries(f, [[(1, 1), (1, 0)]])
        assert sigma(sigma(m)) == m
        assert field_automorphism(f, 2)(m) == m

    def test_field_automorphism_identity(self):
        m = Mat.identity(rationals(), 2)
        assert field_automorphism(rationals(), 0)(m) is m

    def test_field_automorphism_raises_exception_on_invalid_value(self):
        with pytest.raises(UnsupportedAutomorphismError):
            field_automorphism(gf(5), 1)
        with pytest.raises(UnsupportedAutomorphismError):
            field_automorphism(rationals(), 1)
        with pytest.raises(ValueError):
            field_automorphism(gf(2, 2), -1)
        with pytest.raises(FieldMismatchError):
            field_automorphism(gf(2, 2), 1)(Mat.identity(gf(3, 2), 1))
