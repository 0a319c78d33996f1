# SPDX-License-Identifier: GPL-3.0-or-later
import json
import logging
from argparse import ArgumentParser

from ...errors import SchemaError
from ...experiments import SweepReport, render
from ...models import ReportFormat
from ...services import IoService
from ...task import RUN_RESULT, StepEntropyTask

log = logging.getLogger("cottools.stepentropy")


class RenderReport(StepEntropyTask, IoService):
    """
    Render the JSON report of a sweep or token baseline in another format.

    The input is the ``<out>.json`` file written by those commands.
    """

    def add_service_args(self, parser: ArgumentParser) -> None:
        """Add the report arguments."""
        super(RenderReport, self).add_service_args(parser)

        parser.add_argument(
            "--format",
            type=ReportFormat,
            choices=list(ReportFormat),
            default=ReportFormat.TABLE,
            help="Report format (default: table)",
        )

    @StepEntropyTask.step("Read report")
    def read_report(self) -> SweepReport:
        """Load the JSON report."""
        text = "\n".join(self.input_lines())
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"Not a JSON report: {exc}") from None
        if not isinstance(data, dict):
            raise SchemaError("A report must be a JSON object")
        return SweepReport.from_dict(data)

    @StepEntropyTask.step("Render report")
    def write(self, report: SweepReport) -> None:
        """Write the rendered report."""
        with self.open_output() as out:
            out.write(render(report, self.args.format))

    def run(self) -> RUN_RESULT:
        """Render the report."""
        report = self.read_report()
        self.write(report)
        log.debug("Rendered %d row(s)", len(report.rows))
        return RUN_RESULT(True, False, report)
