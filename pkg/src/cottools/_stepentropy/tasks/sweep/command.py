# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Iterator

from ...experiments import SweepReport, strategy_ordering, sweep
from ...models import TraceRecord, parse_trace_line
from ...services import BackendService, ConfigService, IoService, PruneService, SweepService
from ...task import RUN_RESULT, StepEntropyTask

log = logging.getLogger("cottools.stepentropy")


class RunSweep(
    StepEntropyTask, ConfigService, IoService, PruneService, SweepService, BackendService
):
    """
    Measure answer accuracy across pruning ratios and strategies.

    Every trace is compressed at every ratio with every strategy and the
    resulting prompt is answered by the synthetic reader or the completions
    backend. Without --in and with --eval synthetic the bundled synthetic task
    family is used. Finished traces are checkpointed to --checkpoint or next to
    --out so an interrupted sweep resumes where it stopped.
    """

    @StepEntropyTask.step("Load traces")
    def load_traces(self) -> Iterator[TraceRecord]:
        """Yield the traces to evaluate."""
        yield from self.sweep_traces(parse_trace_line)

    @StepEntropyTask.step("Run sweep")
    def run_sweep(self, traces: Iterator[TraceRecord]) -> SweepReport:
        """Evaluate every (strategy, kappa) cell."""
        config = self.cli_config
        return sweep(
            traces,
            config.sweep,
            self.answer_backend,
            prune_config=config.prune,
            checkpoint=self.checkpoint_path,
            jobs=self.jobs,
        )

    @StepEntropyTask.step("Write report")
    def write_report(self, report: SweepReport) -> None:
        """Write the report."""
        self.write_sweep_report(report)

    def run(self) -> RUN_RESULT:
        """Run the sweep."""
        report = self.run_sweep(self.load_traces())
        for kappa, ranking in strategy_ordering(report):
            log.info("kappa %.2f: %s", kappa, " > ".join(ranking))
        self.write_report(report)
        self.record_provenance("sweep", self.input_description())
        return RUN_RESULT(True, False, report)
