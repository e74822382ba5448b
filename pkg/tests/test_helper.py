#!/usr/bin/env python

"""Tests for `pykoszul.helper`."""

import json
import random
from fractions import Fraction

import pytest

from pykoszul.field import gf, rationals
from pykoszul.generate import random_grassmann, random_two_interval
from pykoszul.helper import (
    canonical_json,
    decode_module,
    double_from_json,
    double_to_json,
    encode_module,
    field_from_json,
    field_to_json,
    instance_digest,
    mat_from_json,
    mat_to_json,
)
from pykoszul.koszul import AnalyticFlags, OperatorModule
from pykoszul.linalg import Mat
from pykoszul.spectral import DoubleCplx


def _through_json(data):
    return json.loads(canonical_json(data))


class TestFieldCodec:
    @pytest.mark.parametrize("field", [rationals(), gf(7), gf(2, 2), gf(3, 2)])
    def test_field_round_trip_returns_shared_instance(self, field):
        assert field_from_json(_through_json(field_to_json(field))) is field

    def test_field_from_json_raises_exception_on_unknown_kind(self):
        with pytest.raises(ValueError) as excinfo:
            field_from_json({"kind": "quaternions", "p": 0, "n": 1, "modulus": []})
        assert "Unknown field kind" in str(excinfo.value)


class TestMatCodec:
    def test_mat_to_json_is_row_major(self):
        f = rationals()
        m = Mat.from_entries(f, [[Fraction(1, 2), 1], [0, -3]])
        assert mat_to_json(m) == ["1/2", "1", "0", "-3"]
        assert mat_from_json(f, 2, 2, mat_to_json(m)) == m

    def test_mat_from_json_raises_exception_on_invalid_length(self):
        with pytest.raises(ValueError) as excinfo:
            mat_from_json(gf(5), 2, 2, ["1", "2", "3"])
        assert "Expected 4 entries" in str(excinfo.value)


class TestModuleCodec:
    def test_operator_module_with_flags(self):
        f = gf(2, 2)
        a = Mat.from_entries(f, [[0, 1], [0, 0]])
        m = OperatorModule(f, 2, [a, a, Mat.zeros(f, 2, 2)], ["u", "v", "w"])
        data = _through_json(encode_module(m, AnalyticFlags(2, 2)))
        assert data["type"] == "operator"
        decoded, flags = decode_module(data)
        assert decoded == m
        assert flags.d == 2
        assert flags.analytic_from == 2

    def test_operator_module_without_flags(self):
        m = OperatorModule.trivial(rationals(), 2)
        decoded, flags = decode_module(_through_json(encode_module(m)))
        assert decoded == m
        assert flags is None

    def test_grassmann_model(self):
        rng = random.Random("helper-grassmann")
        g = random_grassmann(rng, gf(5), 3, 2)
        decoded, flags = decode_module(_through_json(encode_module(g)))
        assert decoded == g
        assert decoded.getBox() == g.getBox()
        assert flags is None

    def test_two_interval_module(self):
        rng = random.Random("helper-two-interval")
        t = random_two_interval(rng, gf(3), 2, 2)
        encoded = encode_module(t, AnalyticFlags(2, 2))
        decoded, flags = decode_module(_through_json(encoded))
        assert decoded.m_I == t.m_I
        assert decoded.m_J == t.m_J
        assert decoded.phi == t.phi
        assert decoded.res == t.res
        assert flags.d == 2

    def test_codec_raises_exception_on_invalid_value(self):
        with pytest.raises(TypeError):
            encode_module("module")
        with pytest.raises(ValueError):
            decode_module({"type": "sheaf"})


class TestDoubleCodec:
    def test_double_round_trip(self):
        f = gf(5)
        one = Mat.identity(f, 1)
        dims = {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
        dh = {(0, 0): one, (0, 1): one}
        dv = {(0, 0): one, (1, 0): one}
        dc = DoubleCplx.from_commuting(f, dims, dh, dv)
        decoded = double_from_json(_through_json(double_to_json(dc)))
        assert decoded.getDims() == dims
        for p, q in dims:
            assert decoded.getDh(p, q) == dc.getDh(p, q)
            assert decoded.getDv(p, q) == dc.getDv(p, q)


class TestDigest:
    def test_canonical_json(self):
        assert canonical_json({"b": 1, "a": [1, "x"]}) == b'{"a":[1,"x"],"b":1}'

    def test_instance_digest(self):
        assert instance_digest({}) == (
            "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        )
        digest = instance_digest({"suite": "euler", "index": 3})
        assert len(digest) == 64
        assert digest == instance_digest({"index": 3, "suite": "euler"})
        assert digest != instance_digest({"suite": "euler", "index": 4})
