# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Any, Dict, Iterator

from ...entropy import measure
from ...models import TraceRecord, parse_trace_line
from ...pruner import compressed_record, prune_trace
from ...services import ConfigService, IoService, PruneService
from ...task import RUN_RESULT, StepEntropyTask
from ...utils import dump_line

log = logging.getLogger("cottools.stepentropy")


class PruneTraces(StepEntropyTask, ConfigService, IoService, PruneService):
    """
    Compress the think region of every trace by pruning steps.

    The pruned steps are replaced by the skip token and the remaining ones are
    kept verbatim; every output line holds the compressed think region, the
    inference prompt and the token reduction of one trace.
    Traces the collector flagged as truncated are skipped with a warning.
    """

    @StepEntropyTask.step("Read traces")
    def read_traces(self) -> Iterator[TraceRecord]:
        """Yield the validated input traces."""
        for line in self.input_lines():
            yield parse_trace_line(line)

    @StepEntropyTask.step("Prune traces")
    def prune(self, traces: Iterator[TraceRecord]) -> Iterator[Dict[str, Any]]:
        """Yield the compressed record of every trace."""
        config = self.cli_config.prune
        log.info("Pruning %s of the steps with strategy %s", config.kappa, config.strategy)
        for trace in traces:
            if trace.truncated:
                log.warning("Skipping trace %s: flagged as truncated", trace.id)
                continue
            segmented, report = measure(trace)
            _, compressed = prune_trace(segmented, report.per_step_bits, config)
            yield compressed_record(segmented, compressed)

    @StepEntropyTask.step("Write records")
    def write(self, records: Iterator[Dict[str, Any]]) -> int:
        """Write the records and return how many were written."""
        count = 0
        with self.open_output() as out:
            for record in records:
                out.write(dump_line(record) + "\n")
                count += 1
        return count

    def run(self) -> RUN_RESULT:
        """Prune every trace."""
        count = self.write(self.prune(self.read_traces()))
        log.info("Pruned %d trace(s)", count)
        self.record_provenance("prune")
        return RUN_RESULT(True, False, count)
