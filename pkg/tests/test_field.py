#!/usr/bin/env python

"""Tests for `pykoszul.field`."""

import random
from fractions import Fraction

import pytest

from pykoszul.const import FieldKind
from pykoszul.exc import FieldMismatchError, UsageError
from pykoszul.field import (
    FieldSpec,
    FieldSpecFactory,
    default_modulus,
    gf,
    is_irreducible,
    parse_field,
    rationals,
)


class TestFieldSpecFactory:
    def test_FieldSpec_raises_exception_on_direct_instantiation(self):
        with pytest.raises(NotImplementedError) as excinfo:
            FieldSpec()
        assert "FieldSpecFactory.get_instance" in str(excinfo.value)

    def test_FieldSpecFactory_returns_shared_instances(self):
        assert gf(5) is gf(5)
        assert gf(2, 2) is FieldSpecFactory.get_instance(FieldKind.extension, 2, 2)
        assert rationals() is FieldSpecFactory.get_instance(FieldKind.rationals)
        assert gf(5) is not gf(7)

    def test_FieldSpecFactory_raises_exception_on_invalid_value(self):
        with pytest.raises(TypeError) as excinfo:
            FieldSpecFactory.get_instance("prime", 5)
        assert "Invalid FieldKind" in str(excinfo.value)

        with pytest.raises(ValueError) as excinfo:
            gf(6)
        assert "should be prime" in str(excinfo.value)

        with pytest.raises(ValueError) as excinfo:
            gf(2, 2, modulus=(1, 0, 1))
        assert "reducible" in str(excinfo.value)

        with pytest.raises(ValueError) as excinfo:
            gf(2, 9)
        assert "Extension degree" in str(excinfo.value)

    def test_default_modulus(self):
        assert default_modulus(2, 2) == (1, 1, 1)
        assert default_modulus(2, 3) == (1, 1, 0, 1)
        assert default_modulus(3, 2) == (1, 0, 1)
        assert gf(2, 2).modulus == (1, 1, 1)

    def test_is_irreducible(self):
        assert is_irreducible(2, (1, 1, 1))
        assert not is_irreducible(2, (1, 0, 1))
        assert not is_irreducible(5, (4, 0, 1))


class TestParseField:
    def test_parse_field(self):
        assert parse_field("q") is rationals()
        assert parse_field("Q") is rationals()
        assert parse_field("gf:5") is gf(5)
        assert parse_field("gf:3^2") is gf(3, 2)
        assert parse_field("gf:2^1") is gf(2)

    def test_parse_field_raises_exception_on_invalid_value(self):
        for bad in ["", "gf", "gf:", "gf:4", "gf:2^0", "gf:2^9", "f:5", "gf:5^x"]:
            with pytest.raises(UsageError):
                parse_field(bad)

        with pytest.raises(TypeError):
            parse_field(5)

    def test_spec_string_round_trips(self):
        for spec in ["q", "gf:2", "gf:7", "gf:2^3", "gf:3^2"]:
            assert parse_field(spec).spec_string() == spec


class TestArithmetic:
    def test_prime_field(self):
        f = gf(7)
        assert f.add(5, 4) == 2
        assert f.mul(3, 5) == 1
        assert f.inv(3) == 5
        assert f.neg(0) == 0
        assert f.coerce(Fraction(1, 2)) == 4
        assert f.parse("1/2") == 4
        assert f.parse("-1") == 6

    def test_rationals(self):
        f = rationals()
        assert f.coerce("3/6") == Fraction(1, 2)
        assert f.inv(Fraction(2, 3)) == Fraction(3, 2)
        assert f.format(Fraction(-1, 2)) == "-1/2"

    def test_gf4(self):
        f = gf(2, 2)
        t = (0, 1)
        assert f.mul(t, t) == (1, 1)
        assert f.inv(t) == (1, 1)
        assert f.mul(t, f.inv(t)) == f.one()
        assert f.frobenius(t) == (1, 1)
        assert f.frobenius(t, 2) == t
        assert f.format((1, 1)) == "1+1*t"
        assert f.parse("1+t") == (1, 1)
        assert f.parse("t^1") == t

    def test_gf8_every_nonzero_element_is_invertible(self):
        f = gf(2, 3)
        nonzero = [a for a in f.elements() if not f.is_zero(a)]
        assert len(nonzero) == 7
        for a in nonzero:
            assert f.mul(a, f.inv(a)) == f.one()

    def test_gf9_frobenius_fixes_prime_field(self):
        f = gf(3, 2)
        fixed = [a for a in f.elements() if f.frobenius(a) == a]
        assert sorted(fixed) == [(0, 0), (1, 0), (2, 0)]

    def test_inverse_of_zero_raises_exception(self):
        for f in [rationals(), gf(5), gf(2, 2)]:
            with pytest.raises(ZeroDivisionError):
                f.inv(f.zero())

    def test_parse_raises_exception_on_invalid_value(self):
        with pytest.raises(ValueError):
            gf(5).parse("x")
        with pytest.raises(ValueError):
            gf(2, 2).parse("t^2")
        with pytest.raises(ValueError):
            rationals().parse("1/0")

    def test_coerce_raises_exception_on_invalid_value(self):
        with pytest.raises(TypeError) as excinfo:
            gf(5).coerce(True)
        assert "Invalid Scalar" in str(excinfo.value)

        with pytest.raises(ValueError):
            gf(2, 2).coerce((1, 0, 1))

    def test_random_value_is_deterministic(self):
        for f in [rationals(), gf(5), gf(3, 2)]:
            a = [f.random_value(random.Random("x")) for _ in range(3)]
            b = [f.random_value(random.Random("x")) for _ in range(3)]
            assert a == b


class TestScalar:
    def test_Scalar_arithmetic(self):
        f = gf(5)
        a = f.scalar(2)
        assert a + 3 == 0
        assert a * a == 4
        assert (a / 2) == 1
        assert a ** 4 == 1
        assert -a == 3
        assert 1 - a == 4
        assert a.inverse() == 3
        assert str(a) == "2"
        assert not f.scalar(0)

    def test_Scalar_raises_exception_on_mixed_fields(self):
        with pytest.raises(FieldMismatchError):
            gf(5).scalar(1) + gf(7).scalar(1)
