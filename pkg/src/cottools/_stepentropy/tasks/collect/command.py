# SPDX-License-Identifier: GPL-3.0-or-later
import json
import logging
from typing import Iterator, Optional, Tuple

from ...errors import SchemaError
from ...models import TraceRecord, serialize_trace
from ...services import BackendService, ConfigService, IoService
from ...task import RUN_RESULT, StepEntropyTask

log = logging.getLogger("cottools.stepentropy")

Problem = Tuple[Optional[str], str, Optional[str]]


def parse_problem(line: str) -> Problem:
    """
    Parse a ``{"id", "problem", "ground_truth"?}`` input record.

    Raises:
        SchemaError: if the record is malformed.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"Not a JSON record: {exc}") from None
    if not isinstance(data, dict) or not isinstance(data.get("problem"), str):
        raise SchemaError("A problem record needs a string field problem")
    for key in ("id", "ground_truth"):
        if data.get(key) is not None and not isinstance(data[key], str):
            raise SchemaError(f"Field {key} must be a string")
    return data.get("id"), data["problem"], data.get("ground_truth")


class CollectTraces(StepEntropyTask, ConfigService, IoService, BackendService):
    """
    Collect traces with per-token logprobs from an OpenAI-compatible endpoint.

    Every input line is a {"id", "problem", "ground_truth"} record. The model is
    prompted with the problem followed by an opened think region and every
    generated token is stored with its top alternatives, one trace per line.
    """

    @StepEntropyTask.step("Read problems")
    def read_problems(self) -> Iterator[Problem]:
        """Yield the input problems."""
        for line in self.input_lines():
            yield parse_problem(line)

    @StepEntropyTask.step("Collect traces")
    def collect(self, problems: Iterator[Problem]) -> Iterator[TraceRecord]:
        """Request a completion for every problem, keeping the input order."""
        yield from self.completions_client.fetch_many(problems)

    @StepEntropyTask.step("Write traces")
    def write(self, traces: Iterator[TraceRecord]) -> int:
        """Write the traces and return how many were written."""
        count = 0
        with self.open_output() as out:
            for trace in traces:
                out.write(serialize_trace(trace) + "\n")
                count += 1
        return count

    def run(self) -> RUN_RESULT:
        """Collect every trace."""
        count = self.write(self.collect(self.read_problems()))
        log.info("Collected %d trace(s)", count)
        self.record_provenance("collect")
        return RUN_RESULT(True, False, count)
