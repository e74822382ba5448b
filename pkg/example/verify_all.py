import asyncio
import logging
import sys

from pykoszul.cli import emit_report
from pykoszul.config import SuiteConfig
from pykoszul.const import ReportFormat, Suite
from pykoszul.suites import run_suite_async

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


async def verify_all(field: str = "gf:5", count: int = 5, seed: int = 0) -> int:
    """Run every suite on one field and print a text report for each.

    The base-change suite always works over prime fields of its own, so
    `field` does not apply to it.
    """
    configs = [
        SuiteConfig(suite=suite, field=field, count=count, seed=seed, n_max=10, jobs=2)
        for suite in Suite
    ]
    reports = await asyncio.gather(
        *[run_suite_async(c, timestamp=False) for c in configs]
    )

    failed = 0
    for report in reports:
        sys.stdout.write(emit_report(report, ReportFormat.text).decode("utf-8"))
        failed += report["summary"]["failed"]
    logger.info(f"{len(reports)} suites, {failed} failed instances")
    return 0 if failed == 0 else 1


if __name__ == "__main__":
    sys.exit(asyncio.run(verify_all(*sys.argv[1:2])))
