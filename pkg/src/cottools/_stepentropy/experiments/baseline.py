# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence

from ..backends import Backend
from ..entropy import EntropyReport, measure
from ..models import Strategy, TraceRecord
from ..pruner import build_prompt
from ..segmenter import SegmentedTrace
from ..utils import config_hash
from .sweep import (
    Outcome,
    SweepReport,
    SweepRow,
    aggregate,
    is_correct,
    require_truth,
    run_outcomes,
)

log = logging.getLogger("cottools.stepentropy")

TOKEN_LABEL = "token-low-entropy"
"""Row label of token-level masking in reports."""

_RATIO_EPSILON = 1e-9


def removal_count(ratio: float, think_tokens: int) -> int:
    """Return ``floor(ratio * think_tokens)``, the number of tokens to remove."""
    return int(math.floor(ratio * think_tokens + _RATIO_EPSILON))


def step_tokens(segmented: SegmentedTrace) -> List[int]:
    """Return the positions of the tokens belonging to steps, ascending."""
    return [position for step in segmented.steps for position in step.token_span.as_range()]


def mask_tokens(segmented: SegmentedTrace, removed: Iterable[int]) -> str:
    """
    Return the think text with the characters of the removed tokens deleted.

    Only characters inside the think region are affected; leading and trailing
    newlines are trimmed as the step renderer does.
    """
    record = segmented.source
    offsets = record.token_offsets()
    span = segmented.think_span
    drop = bytearray(len(record.raw_completion))
    for position in removed:
        start = max(offsets[position], span.start)
        end = min(offsets[position + 1], span.end)
        drop[start:end] = b"\x01" * max(0, end - start)
    text = record.raw_completion
    kept = "".join(text[i] for i in span.as_range() if not drop[i])
    return kept.strip("\n")


def token_order(segmented: SegmentedTrace, report: EntropyReport) -> List[int]:
    """Return the step tokens in removal order, ascending ``(entropy, position)``."""
    return sorted(step_tokens(segmented), key=lambda i: (report.per_token_bits[i], i))


def _evaluate_tokens(
    trace: TraceRecord, ratios: Sequence[float], backend: Backend
) -> Dict[str, List[Outcome]]:
    truth = require_truth(trace)
    segmented, report = measure(trace)
    order = token_order(segmented, report)
    total = len(order)
    cells = []
    for ratio in ratios:
        k = removal_count(ratio, total)
        think = mask_tokens(segmented, order[:k])
        ok = is_correct(backend.answer(build_prompt(trace.problem, think)), truth)
        cells.append((ok, total - k, total))
    return {TOKEN_LABEL: cells}


def token_baseline_hash(ratios: Sequence[float], backend: Backend) -> str:
    """Return the configuration digest keying checkpoints of the token baseline."""
    settings = {"ratios": [float(r) for r in ratios], "backend": backend.name}
    return config_hash({"token-baseline": settings, "backend": backend.settings()})


def token_prune_baseline(
    traces: Iterable[TraceRecord],
    ratios: Sequence[float],
    backend: Backend,
    checkpoint: Optional[str] = None,
    jobs: Optional[int] = None,
    seed: int = 0,
) -> SweepReport:
    """
    Evaluate masking individual think tokens, lowest entropy first, irrespective of steps.

    For every ratio ``floor(ratio * T)`` of the ``T`` step tokens are deleted from
    the think region, ties going to the earlier token. The report has the sweep
    layout with the single strategy label ``token-low-entropy``. The checkpoint is
    keyed by the ratios and the backend with its settings, so a resumed run never
    mixes answers of another endpoint or model.
    """
    ratios = [float(r) for r in ratios]
    digest = token_baseline_hash(ratios, backend)
    outcomes = run_outcomes(
        traces, lambda t: _evaluate_tokens(t, ratios, backend), digest, checkpoint, jobs
    )
    return aggregate(outcomes, [TOKEN_LABEL], ratios, seed=seed, digest=digest)


def matched_step_row(
    step_report: SweepReport, removal: float, strategy: str = str(Strategy.LOW_ENTROPY)
) -> Optional[SweepRow]:
    """
    Return the step-pruning row matching a token removal ratio.

    The match is the smallest kappa whose removed share of think tokens is at least
    ``removal``; None when no row removes that much.
    """
    for row in step_report.series(strategy):
        if row.removed_ratio + _RATIO_EPSILON >= removal:
            return row
    return None
