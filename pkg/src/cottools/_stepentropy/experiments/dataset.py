# SPDX-License-Identifier: GPL-3.0-or-later
import logging
from typing import Any, Dict, Iterable, Iterator, Tuple

from attrs import define, field, frozen
from attrs.validators import ge, instance_of

from ..entropy import measure
from ..errors import ValidationError
from ..models import TraceRecord
from ..pruner import PruneConfig, compressed_record, prune_trace

log = logging.getLogger("cottools.stepentropy")

DEFAULT_MAX_TOKENS = 4096


@frozen
class DatasetConfig:
    """Filtering applied while building a compressed dataset."""

    max_tokens: int = field(default=DEFAULT_MAX_TOKENS, validator=[instance_of(int), ge(1)])
    """Records whose compressed completion has more tokens are dropped."""


@define
class DatasetStats:
    """Counters of a dataset build; final once the record stream is exhausted."""

    input: int = 0
    emitted: int = 0
    filtered: int = 0
    skipped_invalid: int = 0
    mean_token_reduction: float = 0.0
    """Running mean of the token reduction of the emitted records."""

    def add_emitted(self, reduction: float) -> None:
        """Count an emitted record and fold its token reduction into the mean."""
        self.emitted += 1
        self.mean_token_reduction += (reduction - self.mean_token_reduction) / self.emitted

    def to_dict(self) -> Dict[str, Any]:
        """Return the stats summary record."""
        return {
            "input": self.input,
            "emitted": self.emitted,
            "filtered": self.filtered,
            "skipped_invalid": self.skipped_invalid,
            "mean_token_reduction": self.mean_token_reduction,
        }


def _records(
    traces: Iterable[TraceRecord], config: PruneConfig, max_tokens: int, stats: DatasetStats
) -> Iterator[Dict[str, Any]]:
    for trace in traces:
        stats.input += 1
        try:
            segmented, report = measure(trace)
            _, compressed = prune_trace(segmented, report.per_step_bits, config)
        except ValidationError as exc:
            log.warning("Skipping trace %s: %s", trace.id, exc)
            stats.skipped_invalid += 1
            continue

        record = compressed_record(segmented, compressed)
        if record["compressed_tokens"] > max_tokens:
            log.debug(
                "Filtering trace %s: %d tokens exceed %d",
                trace.id,
                record["compressed_tokens"],
                max_tokens,
            )
            stats.filtered += 1
            continue
        stats.add_emitted(record["token_reduction"])
        yield record


def build_dataset(
    traces: Iterable[TraceRecord], config: PruneConfig, max_tokens: int = DEFAULT_MAX_TOKENS
) -> Tuple[Iterator[Dict[str, Any]], DatasetStats]:
    """
    Compress every trace and keep those fitting the token limit.

    A record is kept when its compressed completion has at most ``max_tokens``
    tokens, so the limit itself is accepted.

    Args:
        traces (iterable)
            The traces, consumed lazily.
        config (PruneConfig)
            The pruning applied to every trace.
        max_tokens (int, optional)
            The inclusive token limit.
    Returns:
        The lazy stream of compressed records and the stats it updates.
    """
    stats = DatasetStats()
    return _records(traces, config, max_tokens, stats), stats
