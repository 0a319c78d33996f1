# SPDX-License-Identifier: GPL-3.0-or-later
from argparse import ArgumentParser
from typing import Any, Dict, Iterator, Optional

from ..arguments import SplitAndExtend, ratio_range
from ..backends import Backend, TaskFamilySpec, get_backend, task_family
from ..experiments import SweepReport, render
from ..models import EvalMode, ReportFormat, TraceRecord
from .base import Service

REPORT_SUFFIX = ".json"
"""Suffix of the JSON report written next to a rendered report file."""

CHECKPOINT_SUFFIX = ".checkpoint.jsonl"
"""Suffix of the checkpoint derived from --out."""


class SweepService(Service):
    """
    Expose the sweep flags and pick where sweep traces and answers come from.

    Expected to be mixed in with ConfigService, IoService and BackendService.
    """

    def add_service_args(self, parser: ArgumentParser) -> None:
        """
        Add the sweep arguments.

        Args:
            parser (ArgumentParser)
                The parser to include the additional arguments.
        """
        super(SweepService, self).add_service_args(parser)

        group = parser.add_argument_group("Sweep")
        group.add_argument(
            "--ratios",
            metavar="START:END:STEP",
            type=ratio_range,
            default=None,
            help="Pruning ratios to evaluate (default: 0.1:1.0:0.1)",
        )
        group.add_argument(
            "--strategies",
            metavar="CSV",
            action=SplitAndExtend,
            split_on=",",
            default=None,
            help="Strategies to compare, e.g. low,high,random (default: all)",
        )
        group.add_argument(
            "--eval",
            type=EvalMode,
            choices=list(EvalMode),
            default=None,
            help="Answer with the completions backend or the synthetic reader",
        )
        group.add_argument(
            "--checkpoint",
            metavar="PATH",
            default=None,
            help="Checkpoint of finished traces (default: <out>.checkpoint.jsonl)",
        )
        group.add_argument(
            "--format",
            type=ReportFormat,
            choices=list(ReportFormat),
            default=ReportFormat.TABLE,
            help="Report format (default: table)",
        )

    def collect_overrides(self, overrides: Dict[str, Dict[str, Any]]) -> None:
        """Report the sweep flags as ``sweep`` section overrides."""
        super(SweepService, self).collect_overrides(overrides)
        args = self._service_args
        overrides["sweep"].update(
            ratios=args.ratios,
            strategies=args.strategies,
            eval=args.eval,
            checkpoint=args.checkpoint,
        )

    @property
    def report_format(self) -> ReportFormat:
        """Return the requested report format."""
        return self._service_args.format

    @property
    def checkpoint_path(self) -> Optional[str]:
        """Return the checkpoint file, configured or derived from --out."""
        configured = self.cli_config.sweep.checkpoint  # type: ignore[attr-defined]
        if configured:
            return configured
        out = self.output_path  # type: ignore[attr-defined]
        return out + CHECKPOINT_SUFFIX if out else None

    @property
    def family_spec(self) -> TaskFamilySpec:
        """Return the synthetic task family used when no input file is given."""
        spec = self.cli_config.sweep  # type: ignore[attr-defined]
        return TaskFamilySpec(count=spec.samples, seed=spec.seed)

    def sweep_traces(self, parse: Any) -> Iterator[TraceRecord]:
        """Yield the traces of the input file, or of the synthetic family without one."""
        if self.input_path is None and self._uses_family():  # type: ignore[attr-defined]
            return task_family(self.family_spec)
        return (parse(line) for line in self.input_lines())  # type: ignore[attr-defined]

    def _uses_family(self) -> bool:
        return self.cli_config.sweep.eval == EvalMode.SYNTHETIC  # type: ignore[attr-defined]

    def input_description(self) -> Optional[Dict[str, Any]]:
        """Describe generated input for the provenance digest."""
        if self.input_path is None and self._uses_family():  # type: ignore[attr-defined]
            spec = self.family_spec
            return {"task_family": {"count": spec.count, "seed": spec.seed}}
        return None

    @property
    def answer_backend(self) -> Backend:
        """Return the backend answering compressed prompts."""
        if self.cli_config.sweep.eval == EvalMode.SYNTHETIC:  # type: ignore[attr-defined]
            prune = self.cli_config.prune  # type: ignore[attr-defined]
            return get_backend(
                "synthetic",
                self.family_spec,
                skip_token=prune.skip_token,
                collapse=prune.collapse_skips,
            )
        return self.completions_client  # type: ignore[attr-defined]

    def write_sweep_report(self, report: SweepReport) -> None:
        """Write the rendered report and, next to a report file, its JSON form."""
        with self.open_output() as out:  # type: ignore[attr-defined]
            out.write(render(report, self.report_format))
        if self.output_path:  # type: ignore[attr-defined]
            path = self.output_path + REPORT_SUFFIX  # type: ignore[attr-defined]
            with open(path, "w", encoding="utf-8") as f:
                f.write(report.to_json())
