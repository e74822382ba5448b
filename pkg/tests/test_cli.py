#!/usr/bin/env python

"""Tests for `pykoszul.cli`."""

import json

import pytest

from pykoszul.cli import CSV_HEADER, build_parser, emit_report, main
from pykoszul.const import ReportFormat


@pytest.fixture
def sample_report():
    return {
        "suite": "euler",
        "config": {"suite": "euler"},
        "records": [
            {
                "index": 0,
                "digest": "ab" * 32,
                "passed": True,
                "expected_fail": False,
                "dims": {"chi": [0, 0]},
                "details": {},
                "instance": None,
            },
            {
                "index": 1,
                "digest": "cd" * 32,
                "passed": False,
                "expected_fail": False,
                "dims": {},
                "details": {"error": "ValueError: boom"},
                "instance": {"index": 1},
            },
        ],
        "summary": {"total": 2, "passed": 1, "failed": 1, "expected_fail": 0},
    }


class TestEmitReport:
    def test_emit_report_json_is_sorted(self, sample_report):
        data = emit_report(sample_report)
        assert json.loads(data) == sample_report
        assert data == emit_report(dict(reversed(list(sample_report.items()))))

    def test_emit_report_csv(self, sample_report):
        data = emit_report(sample_report, ReportFormat.csv)
        lines = data.decode("utf-8").splitlines()
        assert lines[0] == ",".join(CSV_HEADER + ["chi"])
        assert lines[1] == f"euler,0,{'ab' * 32},true,0,0"
        assert lines[2] == f"euler,0,{'ab' * 32},true,1,0"
        assert lines[3] == f"euler,1,{'cd' * 32},false,,"

    def test_emit_report_csv_without_records(self):
        data = emit_report({"records": []}, ReportFormat.csv)
        assert data == b"suite,instance,digest,passed,degree\n"

    def test_emit_report_text(self, sample_report):
        text = emit_report(sample_report, ReportFormat.text).decode("utf-8")
        assert text.startswith("suite: euler\n")
        assert "#0000 PASS abababababab chi=[0, 0]" in text
        assert "#0001 FAIL" in text
        assert "ValueError: boom" in text
        assert text.endswith("expected_fail=0 failed=1 passed=1 total=2\n")

    def test_emit_report_raises_exception_on_invalid_format(self, sample_report):
        with pytest.raises(TypeError):
            emit_report(sample_report, "json")


class TestMain:
    def test_parser_rejects_unknown_suite(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["verify", "--suite", "sheaves"])

    def test_verify_writes_report(self, tmp_path):
        out = tmp_path / "report.json"
        argv = [
            "verify",
            "--suite",
            "combinatorics",
            "--n-max",
            "3",
            "--no-timestamp",
            "--out",
            str(out),
        ]
        assert main(argv) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["summary"] == {
            "total": 5,
            "passed": 5,
            "failed": 0,
            "expected_fail": 0,
        }
        assert "generated_at" not in report

        again = tmp_path / "again.json"
        argv[-1] = str(again)
        assert main(argv) == 0
        assert again.read_bytes() == out.read_bytes()

    def test_verify_with_config_file(self, tmp_path):
        config = tmp_path / "suite.yml"
        config.write_text("suite: decompose\ncount: 2\nformat: csv\n", encoding="utf-8")
        out = tmp_path / "report.csv"
        argv = ["verify", "--config", str(config), "--field", "gf:2", "--out", str(out)]
        assert main(argv) == 0
        text = out.read_text(encoding="utf-8")
        assert text.startswith("suite,instance,digest,passed,degree")

    def test_usage_errors(self, tmp_path, capsys):
        assert main(["verify"]) == 2
        assert "pykoszul: A suite is required" in capsys.readouterr().err
        assert main(["verify", "--suite", "euler", "--field", "gf:x"]) == 2
        assert "Invalid field spec" in capsys.readouterr().err
        assert main(["report", "--in", str(tmp_path / "missing.json")]) == 2

    def test_gen_then_verify_then_report(self, tmp_path, capsys):
        instances = tmp_path / "instances"
        argv = ["gen", "--suite", "euler", "--count", "2", "--out", str(instances)]
        assert main(argv) == 0
        printed = capsys.readouterr().out.split()
        assert len(printed) == 3
        assert printed[0].endswith("instance-0000.json")

        report = tmp_path / "report.json"
        argv = [
            "verify",
            "--suite",
            "euler",
            "--instances",
            str(instances),
            "--no-timestamp",
            "--out",
            str(report),
        ]
        assert main(argv) == 0
        assert json.loads(report.read_text(encoding="utf-8"))["summary"]["total"] == 3

        text = tmp_path / "report.txt"
        assert main(["report", "--in", str(report), "--out", str(text)]) == 0
        assert text.read_text(encoding="utf-8").startswith("suite: euler")

    def test_report_of_failed_run(self, tmp_path, sample_report):
        path = tmp_path / "failed.json"
        path.write_text(json.dumps(sample_report), encoding="utf-8")
        out = tmp_path / "r.csv"
        argv = ["report", "--in", str(path), "--format", "csv", "--out", str(out)]
        assert main(argv) == 1

    def test_verify_with_malformed_instance_file(self, tmp_path, capsys):
        instances = tmp_path / "instances"
        instances.mkdir()
        path = instances / "instance-0000.json"
        path.write_text('{"suite": "euler"}', encoding="utf-8")
        assert main(["verify", "--suite", "euler", "--instances", str(instances)]) == 2
        assert "Malformed instance file" in capsys.readouterr().err
