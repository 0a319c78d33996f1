# SPDX-License-Identifier: GPL-3.0-or-later
import json
import logging
from typing import Any, Dict, Iterator, Optional, Tuple

from attrs import frozen

from ...errors import SchemaError, ValidationError
from ...models import trace_from_dict
from ...reward import RewardBreakdown, score
from ...services import ConfigService, IoService, RewardService
from ...task import RUN_RESULT, StepEntropyTask
from ...utils import dump_line

log = logging.getLogger("cottools.stepentropy")

Scored = Tuple[str, RewardBreakdown]


@frozen
class Completion:
    """A completion to score."""

    id: str
    completion: str
    ground_truth: str
    token_count: Optional[int]


def parse_completion(line: str) -> Completion:
    """
    Parse a reward input record.

    Trace records are scored on their raw completion with their token count;
    ``{"id", "completion", "ground_truth", "token_count"?}`` records are scored
    as given.

    Raises:
        SchemaError: if the record is malformed.
        ValidationError: if it has no ground truth.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"Not a JSON record: {exc}") from None
    if not isinstance(data, dict):
        raise SchemaError("A reward record must be a JSON object")

    if "tokens" in data:
        trace = trace_from_dict(data)
        record_id, text, truth = trace.id, trace.raw_completion, trace.ground_truth
        count: Optional[int] = len(trace.tokens)
    else:
        record_id, text, truth = data.get("id"), data.get("completion"), data.get("ground_truth")
        count = data.get("token_count")
        if not isinstance(record_id, str) or not isinstance(text, str):
            raise SchemaError("A completion record needs string fields id and completion")
        if count is not None and (isinstance(count, bool) or not isinstance(count, int)):
            raise SchemaError("Field token_count must be an integer")

    if not isinstance(truth, str) or not truth.strip():
        raise ValidationError(f"Record {record_id} has no ground_truth")
    return Completion(id=record_id, completion=text, ground_truth=truth, token_count=count)


class ScoreCompletions(StepEntropyTask, ConfigService, IoService, RewardService):
    """
    Score completions with the composite compression reward.

    The reward adds answer correctness, a tiered reward for the share of skipped
    steps, a penalty for too many skip markers and a penalty for long responses.
    """

    @StepEntropyTask.step("Read completions")
    def read_completions(self) -> Iterator[Completion]:
        """Yield the completions to score."""
        for line in self.input_lines():
            yield parse_completion(line)

    @StepEntropyTask.step("Score completions")
    def score_all(self, completions: Iterator[Completion]) -> Iterator[Scored]:
        """Yield every completion id with its reward breakdown."""
        config = self.cli_config.reward
        for item in completions:
            breakdown = score(item.completion, item.ground_truth, item.token_count, config)
            if breakdown.diagnostics.token_count_source != "backend":
                log.warning("Record %s has no token count, counting words instead", item.id)
            yield item.id, breakdown

    @StepEntropyTask.step("Write rewards")
    def write(self, scored: Iterator[Scored]) -> Dict[str, Any]:
        """Write one reward record per completion and return a summary."""
        count = 0
        total = 0.0
        with self.open_output() as out:
            for record_id, breakdown in scored:
                out.write(dump_line(breakdown.to_record(record_id)) + "\n")
                count += 1
                total += breakdown.total
        return {"count": count, "mean_total": total / count if count else 0.0}

    def run(self) -> RUN_RESULT:
        """Score every completion."""
        summary = self.write(self.score_all(self.read_completions()))
        log.info(
            "Scored %d completion(s), mean reward %.4f", summary["count"], summary["mean_total"]
        )
        self.record_provenance("reward")
        return RUN_RESULT(True, False, summary)
