# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Iterator, List, TextIO

from ...entropy import EntropyReport, measure
from ...models import TraceRecord, parse_trace_line
from ...segmenter import SegmentedTrace
from ...services import ConfigService, IoService
from ...task import RUN_RESULT, StepEntropyTask

log = logging.getLogger("cottools.stepentropy")


def step_table(segmented: SegmentedTrace, report: EntropyReport) -> List[str]:
    """Return the per-step table of one trace, one line per step after a header."""
    lines = [
        f"# {segmented.source.id} mode={report.mode} steps={len(segmented.steps)} "
        f"think_tokens={segmented.think_token_count}",
        f"{'index':>5}  {'tokens':>6}  {'entropy_bits':>12}",
    ]
    for step, bits in zip(segmented.steps, report.per_step_bits):
        lines.append(f"{step.index:>5}  {len(step.token_span):>6}  {bits:>12.4f}")
    return lines


class InspectTraces(StepEntropyTask, ConfigService, IoService):
    """
    Show the steps of every trace with their token counts and entropies.

    Entropies are exact when every token carries one; otherwise they are lower
    bounds computed from the top-k logprobs, which the mode column reports.
    Traces the collector flagged as truncated are skipped with a warning.
    """

    @StepEntropyTask.step("Read traces")
    def read_traces(self) -> Iterator[TraceRecord]:
        """Yield the validated input traces."""
        for line in self.input_lines():
            yield parse_trace_line(line)

    @StepEntropyTask.step("Inspect traces")
    def inspect(self, traces: Iterator[TraceRecord], out: TextIO) -> int:
        """Write the step table of every trace."""
        count = 0
        for trace in traces:
            if trace.truncated:
                log.warning("Skipping trace %s: flagged as truncated", trace.id)
                continue
            segmented, report = measure(trace)
            if report.truncated_tokens:
                log.debug(
                    "Trace %s: %d token(s) lumped a tail bucket", trace.id, report.truncated_tokens
                )
            out.write("\n".join(step_table(segmented, report)) + "\n")
            count += 1
        return count

    def run(self) -> RUN_RESULT:
        """Inspect every trace."""
        with self.open_output() as out:
            count = self.inspect(self.read_traces(), out)
        log.info("Inspected %d trace(s)", count)
        return RUN_RESULT(True, False, count)
