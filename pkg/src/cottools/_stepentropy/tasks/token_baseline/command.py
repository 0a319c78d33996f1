# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Iterator

from ...experiments import SweepReport, token_prune_baseline
from ...models import TraceRecord, parse_trace_line
from ...services import BackendService, ConfigService, IoService, SweepService
from ...task import RUN_RESULT, StepEntropyTask

log = logging.getLogger("cottools.stepentropy")


class RunTokenBaseline(StepEntropyTask, ConfigService, IoService, SweepService, BackendService):
    """
    Measure answer accuracy when masking individual tokens instead of steps.

    At every ratio the lowest-entropy think tokens are deleted irrespective of
    the step they belong to, and the prompt is answered as in a sweep. The
    report uses the sweep layout with the strategy label token-low-entropy.
    Finished traces are checkpointed like a sweep's, keyed by the ratios and
    the answering backend.
    """

    @StepEntropyTask.step("Load traces")
    def load_traces(self) -> Iterator[TraceRecord]:
        """Yield the traces to evaluate."""
        yield from self.sweep_traces(parse_trace_line)

    @StepEntropyTask.step("Run token baseline")
    def run_baseline(self, traces: Iterator[TraceRecord]) -> SweepReport:
        """Evaluate every ratio."""
        spec = self.cli_config.sweep
        return token_prune_baseline(
            traces,
            spec.ratios,
            self.answer_backend,
            checkpoint=self.checkpoint_path,
            jobs=self.jobs,
            seed=spec.seed,
        )

    @StepEntropyTask.step("Write report")
    def write_report(self, report: SweepReport) -> None:
        """Write the report."""
        self.write_sweep_report(report)

    def run(self) -> RUN_RESULT:
        """Run the token masking baseline."""
        report = self.run_baseline(self.load_traces())
        self.write_report(report)
        log.info("Evaluated %d trace(s)", report.rows[0].n_samples if report.rows else 0)
        self.record_provenance("token-baseline", self.input_description())
        return RUN_RESULT(True, False, report)
