# SPDX-License-Identifier: GPL-3.0-or-later
import csv
import io
from typing import Callable, Dict, List

from ..models import ReportFormat
from .sweep import SweepReport, SweepRow

COLUMNS = (
    "strategy",
    "kappa",
    "accuracy",
    "kept_think_tokens",
    "original_think_tokens",
    "token_usage_ratio",
    "n_samples",
)


def _cells(row: SweepRow) -> List[str]:
    return [
        row.strategy,
        f"{row.kappa:.2f}",
        f"{row.accuracy:.4f}",
        str(row.kept_think_tokens),
        str(row.original_think_tokens),
        f"{row.token_usage_ratio:.4f}",
        str(row.n_samples),
    ]


def render_table(report: SweepReport) -> str:
    """Render a fixed-width table, one row per (strategy, kappa)."""
    lines = [list(COLUMNS)] + [_cells(row) for row in report.rows]
    widths = [max(len(line[i]) for line in lines) for i in range(len(COLUMNS))]
    out = []
    for line in lines:
        out.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
    return "\n".join(out) + "\n"


def _csv(header: List[str], rows: List[List[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def render_csv(report: SweepReport) -> str:
    """Render the report as CSV with a header line."""
    return _csv(list(COLUMNS), [_cells(row) for row in report.rows])


def render_plotdata(report: SweepReport) -> str:
    """
    Render ``x,y,series`` triples of the accuracy curves.

    Every strategy contributes an accuracy-vs-kappa series and an
    accuracy-vs-token-usage series.
    """
    rows = []
    for row in report.rows:
        rows.append([f"{row.kappa:.4f}", f"{row.accuracy:.4f}", f"{row.strategy}/kappa"])
    for row in report.rows:
        rows.append(
            [f"{row.token_usage_ratio:.4f}", f"{row.accuracy:.4f}", f"{row.strategy}/token-usage"]
        )
    return _csv(["x", "y", "series"], rows)


_RENDERERS: Dict[ReportFormat, Callable[[SweepReport], str]] = {
    ReportFormat.TABLE: render_table,
    ReportFormat.CSV: render_csv,
    ReportFormat.PLOTDATA: render_plotdata,
}


def render(report: SweepReport, fmt: ReportFormat = ReportFormat.TABLE) -> str:
    """Render a sweep report deterministically in the requested format."""
    return _RENDERERS[ReportFormat(fmt)](report)
