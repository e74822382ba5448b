#!/usr/bin/env python

"""Tests for `pykoszul.cup`."""

import random

import pytest

from pykoszul.cup import (
    CohClass,
    connecting_map,
    cup_cochain,
    cup_equals_delta_check,
    cup_product,
    extension_from_cocycle,
    leibniz_check,
    pairing_report,
    shuffle_sign,
)
from pykoszul.exc import CocycleError, PreconditionError
from pykoszul.field import gf, rationals
from pykoszul.generate import random_cocycle, random_module, random_vector
from pykoszul.koszul import AnalyticFlags, OperatorModule, koszul_cochain
from pykoszul.linalg import Mat

FIELDS = [rationals(), gf(2), gf(3), gf(5)]


@pytest.fixture
def trivial_pair():
    f = gf(5)
    m = OperatorModule.trivial(f, 2)
    host = koszul_cochain(m, [0, 1])
    xi = CohClass(host, 1, Mat.column_vector(f, [1, 0]))
    v = CohClass(host, 1, Mat.column_vector(f, [0, 1]))
    return m, xi, v


class TestCohClass:
    def test_CohClass_raises_exception_on_non_cocycle(self):
        f = gf(5)
        m = OperatorModule(f, 1, [Mat.identity(f, 1), Mat.zeros(f, 1, 1)])
        host = koszul_cochain(m, [0, 1])
        with pytest.raises(PreconditionError) as excinfo:
            CohClass(host, 0, Mat.column_vector(f, [1]))
        assert "not a cocycle" in str(excinfo.value)
        with pytest.raises(ValueError):
            CohClass(host, 0, Mat.column_vector(f, [1, 0]))
        with pytest.raises(TypeError):
            CohClass("host", 0, Mat.column_vector(f, [1]))

    def test_CohClass_coordinates(self, trivial_pair):
        _, xi, _ = trivial_pair
        assert not xi.is_zero()
        assert xi.coordinates().shape == (2, 1)


class TestCupProduct:
    def test_shuffle_sign(self):
        assert shuffle_sign((0,), (1,)) == 1
        assert shuffle_sign((1,), (0,)) == -1
        assert shuffle_sign((0, 2), (1,)) == -1
        assert shuffle_sign((1, 2), (0,)) == 1
        assert shuffle_sign((), (0, 1)) == 1

    def test_cup_product_known_answer(self, trivial_pair):
        m, xi, v = trivial_pair
        cup = cup_product(m, xi, v)
        assert cup.degree == 2
        assert cup.rep == Mat.column_vector(m.field, [1])
        assert cup_product(m, xi, xi).is_zero()

    def test_cup_cochain_raises_exception_on_incompatible_hosts(self, trivial_pair):
        m, xi, v = trivial_pair
        other = koszul_cochain(m, [0])
        one = Mat.column_vector(m.field, [1])
        with pytest.raises(PreconditionError) as excinfo:
            cup_cochain(m, xi.host, 1, xi.rep, other, 0, one)
        assert "Incompatible hosts" in str(excinfo.value)

    @pytest.mark.parametrize("field", FIELDS)
    @pytest.mark.parametrize("module_first", [True, False])
    def test_leibniz_check(self, field, module_first):
        rng = random.Random(f"leibniz:{field.spec_string()}:{module_first}")
        for _ in range(4):
            m, _ = random_module(rng, field, rng.randint(1, 3), 2)
            l = m.op_count
            host = koszul_cochain(m, range(l))
            triv = koszul_cochain(OperatorModule.trivial(field, l), range(l))
            first, second = (host, triv) if module_first else (triv, host)
            a = rng.randint(0, l)
            b = rng.randint(0, l - a)
            assert leibniz_check(
                m,
                range(l),
                a,
                random_vector(rng, field, first.getDim(a)),
                b,
                random_vector(rng, field, second.getDim(b)),
                module_first,
            )


class TestConnectingMap:
    def test_cup_equals_delta_known_answer(self, trivial_pair):
        m, xi, v = trivial_pair
        assert cup_equals_delta_check(m, xi, v)

    def test_connecting_map_ignores_offset(self, trivial_pair):
        m, xi, v = trivial_pair
        e = extension_from_cocycle(m, xi)
        assert e.dim == 2
        assert e.quotient() == OperatorModule.trivial(m.field, 2)
        plain = connecting_map(e, v)
        shifted = connecting_map(e, v, Mat.column_vector(m.field, [3, 4]))
        assert plain.coordinates() == shifted.coordinates()
        with pytest.raises(TypeError):
            connecting_map(m, v)

    @pytest.mark.parametrize("field", FIELDS)
    def test_cup_equals_delta_random(self, field):
        rng = random.Random(f"cup-delta:{field.spec_string()}")
        for _ in range(4):
            m, _ = random_module(rng, field, rng.randint(1, 3), 2)
            l = m.op_count
            host = koszul_cochain(m, range(l))
            triv = koszul_cochain(OperatorModule.trivial(field, l), range(l))
            q = rng.randint(0, l)
            xi = CohClass(host, 1, random_cocycle(rng, host, 1))
            v = CohClass(triv, q, random_vector(rng, field, triv.getDim(q)))
            assert cup_equals_delta_check(m, xi, v)

    def test_extension_from_cocycle_raises_exception_on_invalid_value(self):
        f = gf(5)
        m = OperatorModule(f, 1, [Mat.identity(f, 1), Mat.zeros(f, 1, 1)])
        with pytest.raises(CocycleError):
            extension_from_cocycle(m, Mat.column_vector(f, [0, 1]))
        with pytest.raises(ValueError):
            extension_from_cocycle(m, Mat.column_vector(f, [0]))


class TestPairingReport:
    def test_pairing_report_trivial(self):
        m = OperatorModule.trivial(gf(5), 3)
        record = pairing_report(m, AnalyticFlags(2, 2))
        assert record["h1_an"] == 2
        assert record["h2_an"] == 1
        assert record["h1_cts_trivial"] == 3
        assert record["h2_cts"] == 3
        assert len(record["classes"]) == 2
        assert all(c["factorization"] and c["les_exact"] for c in record["classes"])
        assert record["passed"]

    def test_pairing_report_raises_exception_on_invalid_value(self):
        m = OperatorModule.trivial(gf(5), 3)
        with pytest.raises(PreconditionError):
            pairing_report(m, AnalyticFlags(2, 3))
