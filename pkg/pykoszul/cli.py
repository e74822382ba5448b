import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pykoszul.config import SuiteConfig, load_config
from pykoszul.const import ExitCode, ReportFormat, Suite
from pykoszul.exc import UsageError
from pykoszul.generate import gen_random
from pykoszul.helper import ReportData
from pykoszul.suites import exit_code, run_suite

logger = logging.getLogger(__name__)

CSV_HEADER = ["suite", "instance", "digest", "passed", "degree"]


def _csv_report(report: ReportData) -> str:
    records = report.get("records", [])
    keys = sorted({key for r in records for key in r["dims"]})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER + keys)
    suite = report.get("suite", "")
    for r in records:
        dims = r["dims"]
        degrees = max((len(v) for v in dims.values()), default=0)
        prefix = [suite, r["index"], r["digest"], str(r["passed"]).lower()]
        if not degrees:
            writer.writerow(prefix + [""] + [""] * len(keys))
        for i in range(degrees):
            row = [dims[k][i] if k in dims and i < len(dims[k]) else "" for k in keys]
            writer.writerow(prefix + [i] + row)
    return buf.getvalue()


def _text_report(report: ReportData) -> str:
    lines = [f"suite: {report.get('suite', '')}"]
    for r in report.get("records", []):
        status = "PASS" if r["passed"] else "FAIL"
        if r["expected_fail"]:
            status = "XFAIL" if not r["passed"] else "XPASS"
        dims = ", ".join(f"{k}={v}" for k, v in sorted(r["dims"].items()))
        lines.append(f"  #{r['index']:04d} {status} {r['digest'][:12]} {dims}")
        if "error" in r["details"]:
            lines.append(f"        {r['details']['error']}")
    summary = report.get("summary", {})
    lines.append(" ".join(f"{k}={summary[k]}" for k in sorted(summary)))
    return "\n".join(lines) + "\n"


def emit_report(report: ReportData, fmt: ReportFormat = ReportFormat.json) -> bytes:
    """Serialize a report; keys are sorted so equal reports give equal bytes."""
    if not isinstance(fmt, ReportFormat):
        raise TypeError("Invalid ReportFormat")
    if fmt is ReportFormat.json:
        text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    elif fmt is ReportFormat.csv:
        text = _csv_report(report)
    else:
        text = _text_report(report)
    return text.encode("utf-8")


def _write(data: bytes, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(data)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--config", type=Path, help="YAML suite file; flags win over its values"
    )
    p.add_argument("--suite", choices=[s.cliName() for s in Suite])
    p.add_argument("--field", help="q, gf:p or gf:p^n")
    p.add_argument("--d", type=int)
    p.add_argument("--dim-max", type=int, dest="dim_max")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument(
        "--include-counterexample",
        action="store_true",
        default=None,
        dest="include_counterexample",
    )
    p.add_argument("--out", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pykoszul", description="Verify Koszul and Herr complex statements"
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a suite and emit a report")
    _add_config_args(verify)
    verify.add_argument("--format", choices=[f.value for f in ReportFormat])
    verify.add_argument(
        "--instances", type=Path, help="directory of instance-NNNN.json files"
    )
    verify.add_argument("--jobs", type=int)
    verify.add_argument("--no-timestamp", action="store_true", help="omit generated_at")

    gen = sub.add_parser("gen", help="write seeded random instances")
    _add_config_args(gen)

    report = sub.add_parser("report", help="re-emit a saved JSON report")
    report.add_argument("--in", type=Path, required=True, dest="input")
    report.add_argument(
        "--format", choices=[f.value for f in ReportFormat], default="text"
    )
    report.add_argument("--out", type=Path)
    return parser


_CONFIG_KEYS = (
    "suite",
    "field",
    "d",
    "dim_max",
    "seed",
    "count",
    "n_max",
    "include_counterexample",
    "out",
    "format",
    "instances",
    "jobs",
)


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    overrides: Dict[str, Any] = {k: getattr(args, k, None) for k in _CONFIG_KEYS}
    if args.config is not None:
        return load_config(args.config, overrides)
    return SuiteConfig(**overrides)


def _verify(args: argparse.Namespace) -> ExitCode:
    config = config_from_args(args)
    report = run_suite(config, timestamp=not args.no_timestamp)
    _write(emit_report(report, config.format), config.out)
    summary = report["summary"]
    logger.info(f"verify: {config.suite.cliName()} {summary}")
    return exit_code(report)


def _gen(args: argparse.Namespace) -> ExitCode:
    paths = gen_random(config_from_args(args))
    for path in paths:
        print(path)
    return ExitCode.ok


def _report(args: argparse.Namespace) -> ExitCode:
    try:
        with open(args.input, "r", encoding="utf-8") as fh:
            report = json.load(fh)
    except (OSError, json.JSONDecodeError) as err:
        raise UsageError(f"Cannot read report {args.input}: {err}")
    _write(emit_report(report, ReportFormat(args.format)), args.out)
    return exit_code(report) if "summary" in report else ExitCode.ok


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    levels = [logging.WARNING, logging.INFO, logging.DEBUG]
    logging.basicConfig(level=levels[min(args.verbose, 2)])
    commands = {"verify": _verify, "gen": _gen, "report": _report}
    try:
        return int(commands[args.command](args))
    except UsageError as err:
        print(f"pykoszul: {err}", file=sys.stderr)
        return int(ExitCode.usage)