#!/usr/bin/env python

"""Tests for `pykoszul.herr`."""

import random

import pytest

from pykoszul.complexes import cohomology
from pykoszul.const import Variant
from pykoszul.dolbeault import TwoIntervalModule
from pykoszul.exc import PreconditionError
from pykoszul.field import gf, rationals
from pykoszul.generate import BASE_CHANGE_PAIRS, random_module, random_two_interval
from pykoszul.herr import (
    HerrInstance,
    base_change_descent,
    euler_factorization_check,
    fx_dims_check,
    herr_complex,
    herr_dims,
    herr_identification,
    iterated_rhom_check,
    predicted_continuous,
    spectral_comparison,
)
from pykoszul.koszul import AnalyticFlags, OperatorModule, decompose
from pykoszul.linalg import Mat

FIELDS = [rationals(), gf(2), gf(5)]


class TestHerrInstance:
    def test_HerrInstance_raises_exception_on_invalid_value(self):
        f = gf(5)
        with pytest.raises(PreconditionError):
            HerrInstance(OperatorModule.trivial(f, 1))
        with pytest.raises(PreconditionError):
            HerrInstance(OperatorModule.trivial(f, 3), AnalyticFlags(3, 2))
        with pytest.raises(TypeError):
            HerrInstance("module")

    def test_analytic_variant_needs_flags(self):
        h = HerrInstance(OperatorModule.trivial(gf(5), 3))
        assert not h.is_analytic()
        with pytest.raises(PreconditionError):
            herr_complex(h, Variant.analytic)
        with pytest.raises(TypeError):
            herr_dims(h, "continuous")

    def test_herr_identification(self):
        rng = random.Random("herr-identification")
        m, flags = random_module(rng, gf(3), 3, 2, 2)
        h = HerrInstance(m, flags)
        for variant in Variant:
            assert herr_identification(h, variant).is_iso()


class TestFxDims:
    def test_predicted_continuous(self):
        assert predicted_continuous(3, [1, 2, 1]) == [1, 4, 6, 4, 1]
        assert predicted_continuous(1, [1, 2, 1]) == [1, 2, 1]

    def test_fx_dims_trivial_module(self):
        h = HerrInstance(OperatorModule.trivial(gf(5), 4), AnalyticFlags(3, 2))
        record = fx_dims_check(h)
        assert record["analytic"] == [1, 2, 1]
        assert record["continuous"] == [1, 4, 6, 4, 1]
        assert record["h1_identity"]
        assert record["top_identity"]
        assert record["passed"]

    @pytest.mark.parametrize("field", FIELDS)
    def test_fx_dims_random(self, field):
        rng = random.Random(f"fx:{field.spec_string()}")
        for _ in range(4):
            m, flags = random_module(rng, field, rng.randint(1, 3), 3, 2)
            assert fx_dims_check(HerrInstance(m, flags))["passed"]


class TestEuler:
    def test_euler_factorization_d1(self):
        h = HerrInstance(OperatorModule.trivial(gf(5), 2), AnalyticFlags(1, 2))
        record = euler_factorization_check(h)
        assert record["chi_analytic"] == 0
        assert record["chi_continuous"] == 0
        assert record["n_chi"] == 1
        assert record["passed"]

    @pytest.mark.parametrize("field", FIELDS)
    def test_euler_factorization_two_interval(self, field):
        rng = random.Random(f"euler:{field.spec_string()}")
        for d in (1, 2, 3):
            t = random_two_interval(rng, field, d, 2)
            h = HerrInstance(t, AnalyticFlags(d, 2))
            record = euler_factorization_check(h)
            assert record["passed"]
            assert record["chi_analytic"] == 0

    def test_two_interval_complex_dims(self):
        f = gf(5)
        m_I = OperatorModule(f, 1, [Mat.zeros(f, 1, 1)])
        m_J = OperatorModule(f, 2, [Mat.zeros(f, 2, 2)])
        phi = Mat.from_entries(f, [[0], [0]])
        res = Mat.from_entries(f, [[1], [0]])
        h = HerrInstance(TwoIntervalModule(m_I, m_J, phi, res), AnalyticFlags(1, 2))
        c = herr_complex(h, Variant.continuous)
        assert c.getDims() == {0: 1, 1: 3, 2: 2}
        assert cohomology(c).dims_list(0, 2) == [0, 1, 1]


class TestIteratedRHom:
    def test_iterated_rhom_trivial(self):
        m = OperatorModule.trivial(gf(5), 4)
        assert iterated_rhom_check(m, ([0, 1], [2, 3]))
        assert iterated_rhom_check(m, ([], [0, 1, 2, 3]))

    @pytest.mark.parametrize("field", FIELDS)
    def test_iterated_rhom_random(self, field):
        rng = random.Random(f"iterated:{field.spec_string()}")
        for _ in range(4):
            m, _ = random_module(rng, field, 3, 2)
            cut = rng.randint(0, 4)
            assert iterated_rhom_check(m, (list(range(cut)), list(range(cut, 4))))

    def test_iterated_rhom_raises_exception_on_overlap(self):
        with pytest.raises(ValueError):
            iterated_rhom_check(OperatorModule.trivial(gf(5), 3), ([0, 1], [1, 2]))


class TestBaseChange:
    def test_base_change_trivial(self):
        record = base_change_descent(OperatorModule.trivial(gf(2), 2), 2)
        assert record["field"] == "GF(2^2)"
        assert record["dims"] == record["extended_dims"] == [1, 2, 1]
        assert record["fixed_dims"] == [1, 2, 1]
        assert record["passed"]

    @pytest.mark.parametrize("p, n", BASE_CHANGE_PAIRS)
    def test_base_change_random(self, p, n):
        rng = random.Random(f"base-change:{p}:{n}")
        for _ in range(3):
            m, _ = random_module(rng, gf(p), 2, 2)
            assert base_change_descent(m, n)["passed"]

    def test_base_change_analytic_variant(self):
        rng = random.Random("base-change-analytic")
        m, _ = random_module(rng, gf(3), 2, 2, 2)
        assert base_change_descent(m, 2, Variant.analytic)["passed"]

    def test_base_change_raises_exception_on_invalid_value(self):
        with pytest.raises(PreconditionError):
            base_change_descent(OperatorModule.trivial(rationals(), 2), 2)
        with pytest.raises(PreconditionError):
            base_change_descent(OperatorModule.trivial(gf(2, 2), 2), 2)
        with pytest.raises(ValueError):
            base_change_descent(OperatorModule.trivial(gf(2), 2), 5)


class TestSpectralComparison:
    def test_spectral_comparison_trivial(self):
        h = HerrInstance(OperatorModule.trivial(gf(5), 3), AnalyticFlags(2, 2))
        record = spectral_comparison(h, 2)
        assert record["total"] == [1, 3, 3, 1]
        assert record["predicted"] == [1, 3, 3, 1]
        assert record["killed"] == 1
        assert record["columns"]["e1_differentials_zero"]
        assert record["passed"]

    @pytest.mark.parametrize("field", FIELDS)
    def test_spectral_comparison_random(self, field):
        rng = random.Random(f"spectral:{field.spec_string()}")
        for _ in range(3):
            d = rng.randint(1, 3)
            k = rng.randint(1, d + 1)
            m, _ = random_module(rng, field, d, 2, k)
            assert spectral_comparison(HerrInstance(m), k)["passed"]

    def test_spectral_comparison_keeps_x0_when_nothing_else_survives(self):
        f = gf(5)
        m = OperatorModule(f, 1, [Mat.identity(f, 1), Mat.zeros(f, 1, 1)])
        for k in (1, 2):
            record = spectral_comparison(HerrInstance(m, AnalyticFlags(1, k)), k)
            assert record["total"] == decompose(m, k).dim_table["lhs"] == [0, 0, 0]
            assert record["passed"]

        nil = Mat.from_entries(f, [[0, 1], [0, 0]])
        zero = Mat.zeros(f, 2, 2)
        m = OperatorModule(f, 2, [nil, zero, zero])
        record = spectral_comparison(HerrInstance(m, AnalyticFlags(2, 1)), 1)
        assert record["total"] == [1, 3, 3, 1]
        assert record["predicted"] == [1, 3, 3, 1]

    @pytest.mark.parametrize("field", FIELDS)
    def test_spectral_comparison_agrees_with_decompose(self, field):
        rng = random.Random(f"spectral-decompose:{field.spec_string()}")
        for _ in range(3):
            d = rng.randint(1, 3)
            m, _ = random_module(rng, field, d, 2, 1)
            for k in range(1, d + 2):
                record = spectral_comparison(HerrInstance(m), k)
                assert record["total"] == decompose(m, k).dim_table["lhs"]
                assert record["passed"]

        m, _ = random_module(rng, field, 2, 2, 2)
        ops = [Mat.identity(field, m.dim)] + list(m.getOps()[1:])
        m = OperatorModule(field, m.dim, ops)
        for k in (2, 3):
            record = spectral_comparison(HerrInstance(m), k)
            assert record["total"] == decompose(m, k).dim_table["lhs"] == [0, 0, 0, 0]

    def test_spectral_comparison_raises_exception_on_invalid_value(self):
        f = gf(5)
        m = OperatorModule(f, 1, [Mat.zeros(f, 1, 1), Mat.identity(f, 1)])
        with pytest.raises(PreconditionError):
            spectral_comparison(HerrInstance(m), 1)
        with pytest.raises(ValueError):
            spectral_comparison(HerrInstance(m), 3)
