#!/usr/bin/env python

"""Tests for `pykoszul.config`."""

from pathlib import Path

import pytest

from pykoszul.config import SuiteConfig, load_config
from pykoszul.const import ReportFormat, Suite
from pykoszul.exc import UsageError
from pykoszul.field import gf, rationals


class TestSuiteConfig:
    def test_SuiteConfig_defaults(self):
        config = SuiteConfig(suite="euler")
        assert config.suite is Suite.euler
        assert config.field is gf(5)
        assert config.field_spec == "gf:5"
        assert config.d == 3
        assert config.dim_max == 3
        assert config.seed == 0
        assert config.count == 10
        assert config.n_max == 20
        assert config.jobs == 1
        assert config.format is ReportFormat.json
        assert config.out is None
        assert config.instances is None
        assert not config.include_counterexample

    def test_SuiteConfig_accepts_suite_member_and_paths(self):
        config = SuiteConfig(
            suite=Suite.quad_matrix, field="q", out="report.json", format="csv"
        )
        assert config.suite is Suite.quad_matrix
        assert config.field is rationals()
        assert config.out == Path("report.json")
        assert config.format is ReportFormat.csv

    def test_SuiteConfig_to_json(self):
        config = SuiteConfig(suite="spectral_collapse", seed=3, jobs=4, out="x.json")
        assert config.to_json() == {
            "suite": "spectral-collapse",
            "field": "gf:5",
            "d": 3,
            "dim_max": 3,
            "seed": 3,
            "count": 10,
            "n_max": 20,
            "include_counterexample": False,
        }

    def test_SuiteConfig_from_mapping(self):
        config = SuiteConfig.from_mapping(
            {"suite": "fx-dims", "dim-max": 2, "n-max": 4}
        )
        assert config.dim_max == 2
        assert config.n_max == 4

    @pytest.mark.parametrize(
        "kwargs, message",
        [
            ({"suite": "euler", "colour": "red"}, "Unknown config keys"),
            ({}, "A suite is required"),
            ({"suite": "sheaves"}, "Unknown suite"),
            ({"suite": "euler", "field": "gf:x"}, "Invalid field spec"),
            ({"suite": "euler", "field": "gf:6"}, "Invalid field spec"),
            ({"suite": "euler", "d": 0}, "d should be an integer"),
            ({"suite": "euler", "d": True}, "d should be an integer"),
            ({"suite": "euler", "n_max": 25}, "n_max should be an integer"),
            ({"suite": "euler", "seed": "0"}, "seed should be an integer"),
            ({"suite": "euler", "format": "xml"}, "Unknown format"),
        ],
    )
    def test_SuiteConfig_raises_exception_on_invalid_value(self, kwargs, message):
        with pytest.raises(UsageError) as excinfo:
            SuiteConfig(**kwargs)
        assert message in str(excinfo.value)


class TestLoadConfig:
    def test_load_config_with_overrides(self, tmp_path):
        path = tmp_path / "suite.yml"
        path.write_text(
            "suite: fx-dims\nfield: q\ncount: 4\ndim-max: 2\n", encoding="utf-8"
        )
        config = load_config(path, {"count": 7, "seed": None})
        assert config.suite is Suite.fx_dims
        assert config.field_spec == "q"
        assert config.count == 7
        assert config.dim_max == 2
        assert config.seed == 0

    def test_load_config_raises_exception_on_invalid_file(self, tmp_path):
        with pytest.raises(UsageError) as excinfo:
            load_config(tmp_path / "missing.yml")
        assert "Cannot read config" in str(excinfo.value)

        listing = tmp_path / "list.yml"
        listing.write_text("- euler\n- pairing\n", encoding="utf-8")
        with pytest.raises(UsageError) as excinfo:
            load_config(listing)
        assert "should be a mapping" in str(excinfo.value)

        broken = tmp_path / "broken.yml"
        broken.write_text("suite: [euler\n", encoding="utf-8")
        with pytest.raises(UsageError):
            load_config(broken)

    def test_load_config_of_empty_file_needs_suite(self, tmp_path):
        path = tmp_path / "empty.yml"
        path.write_text("", encoding="utf-8")
        with pytest.raises(UsageError):
            load_config(path)
        assert load_config(path, {"suite": "pairing"}).suite is Suite.pairing
