# SPDX-License-Identifier: GPL-3.0-or-later
import json
import logging
from argparse import ArgumentParser
from typing import Any, Dict, Iterator

from ...arguments import optional_int
from ...experiments import DatasetStats, build_dataset
from ...models import TraceRecord, parse_trace_line
from ...services import ConfigService, IoService, PruneService
from ...task import RUN_RESULT, StepEntropyTask
from ...utils import dump_line

log = logging.getLogger("cottools.stepentropy")

STATS_SUFFIX = ".stats.json"


class BuildDataset(StepEntropyTask, ConfigService, IoService, PruneService):
    """
    Build a compressed fine-tuning dataset from collected traces.

    Every trace is pruned as by the prune command. Records whose compressed
    completion exceeds --max-tokens tokens are dropped and traces which cannot
    be segmented are skipped with a warning. The build statistics are logged
    and written next to --out.
    """

    def add_service_args(self, parser: ArgumentParser) -> None:
        """Add the dataset arguments."""
        super(BuildDataset, self).add_service_args(parser)

        parser.add_argument(
            "--max-tokens",
            metavar="UINT",
            type=optional_int,
            default=None,
            help="Drop records whose compressed completion is longer (default: 4096)",
        )

    def collect_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Report --max-tokens as a ``dataset`` section override."""
        super(BuildDataset, self).collect_overrides(overrides)
        overrides["dataset"]["max_tokens"] = self.args.max_tokens

    @StepEntropyTask.step("Read traces")
    def read_traces(self) -> Iterator[TraceRecord]:
        """Yield the validated input traces."""
        for line in self.input_lines():
            yield parse_trace_line(line)

    @StepEntropyTask.step("Write dataset")
    def write(self, records: Iterator[Dict[str, Any]]) -> None:
        """Write the dataset records."""
        with self.open_output() as out:
            for record in records:
                out.write(dump_line(record) + "\n")

    def write_stats(self, stats: DatasetStats) -> None:
        summary = stats.to_dict()
        log.info(
            "Emitted %d of %d record(s), %d filtered, %d skipped, mean token reduction %.4f",
            summary["emitted"],
            summary["input"],
            summary["filtered"],
            summary["skipped_invalid"],
            summary["mean_token_reduction"],
        )
        if self.output_path:
            with open(self.output_path + STATS_SUFFIX, "w", encoding="utf-8") as f:
                json.dump(summary, f, indent=2, sort_keys=True)
                f.write("\n")

    def run(self) -> RUN_RESULT:
        """Build the dataset."""
        config = self.cli_config
        records, stats = build_dataset(
            self.read_traces(), config.prune, max_tokens=config.dataset.max_tokens
        )
        self.write(records)
        self.write_stats(stats)
        self.record_provenance("build-dataset")
        return RUN_RESULT(True, False, stats)
