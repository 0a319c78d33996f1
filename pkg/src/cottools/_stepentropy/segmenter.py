# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import re
from typing import List, Optional, Sequence, Tuple

from attrs import evolve, field, frozen
from attrs.validators import deep_iterable, instance_of

from .errors import MissingThinkTags, MultipleThinkBlocks, TokenBoundaryError
from .models import Span, Step, TraceRecord

log = logging.getLogger("cottools.stepentropy")

THINK_OPEN = "<think>"
THINK_CLOSE = "</think>"
STEP_DELIMITER = "\n\n"

# Runs of two or more newlines form a single boundary.
_BOUNDARY = re.compile(r"\n{2,}")


@frozen
class SegmentedTrace:
    """A trace with its think region split into reasoning steps."""

    source: TraceRecord = field(validator=instance_of(TraceRecord))
    think_span: Span = field(validator=instance_of(Span))
    """Characters strictly between the think tags."""

    steps: Tuple[Step, ...] = field(converter=tuple, validator=deep_iterable(instance_of(Step)))
    tail: str = field(validator=instance_of(str))
    """Text after the closing tag, the final-answer region."""

    @property
    def think_text(self) -> str:
        """Return the raw think region."""
        return self.source.raw_completion[self.think_span.start : self.think_span.end]  # noqa: E203

    @property
    def think_token_count(self) -> int:
        """Return the number of tokens belonging to steps."""
        return sum(len(step.token_span) for step in self.steps)

    def with_entropies(self, per_step_bits: Sequence[float]) -> "SegmentedTrace":
        """Return a copy whose steps carry the given step entropies."""
        if len(per_step_bits) != len(self.steps):
            raise ValueError(
                f"Expected {len(self.steps)} step entropies, got {len(per_step_bits)}"
            )
        steps = [evolve(step, entropy_bits=bits) for step, bits in zip(self.steps, per_step_bits)]
        return evolve(self, steps=steps)


def step_char_ranges(text: str, start: int = 0, end: Optional[int] = None) -> List[Span]:
    """
    Return the character ranges of the ``\\n\\n`` delimited steps of ``text[start:end]``.

    Newlines touching a boundary are trimmed from the neighbouring segments and
    whitespace-only segments are dropped.
    """
    end = len(text) if end is None else end
    pieces = []
    position = start
    for match in _BOUNDARY.finditer(text, start, end):
        pieces.append((position, match.start()))
        position = match.end()
    pieces.append((position, end))

    ranges = []
    for lo, hi in pieces:
        while lo < hi and text[lo] == "\n":
            lo += 1
        while hi > lo and text[hi - 1] == "\n":
            hi -= 1
        if text[lo:hi].strip():
            ranges.append(Span(lo, hi))
    return ranges


def split_steps(text: str) -> List[str]:
    """Split a think text into its non-empty steps using the segmentation rule."""
    return [text[r.start : r.end] for r in step_char_ranges(text)]  # noqa: E203


def step_token_spans(record: TraceRecord, char_ranges: Sequence[Span]) -> List[Span]:
    """
    Map character ranges of a trace onto the token ranges covering them.

    A token belongs to the range holding its non-newline characters. Tokens made
    only of newlines, or whose content lies outside every range, belong to none.

    Args:
        record (TraceRecord)
            The trace the ranges refer to.
        char_ranges (list)
            Disjoint ascending character ranges inside ``raw_completion``.
    Returns:
        One token range per character range.
    Raises:
        TokenBoundaryError: if a token holds content characters of two ranges.
        ValueError: if a range holds no content character.
    """
    raw = record.raw_completion
    owner = [-1] * len(raw)
    for number, span in enumerate(char_ranges):
        for position in span.as_range():
            owner[position] = number

    first: List[Optional[int]] = [None] * len(char_ranges)
    last: List[Optional[int]] = [None] * len(char_ranges)
    offset = 0
    for token_index, token in enumerate(record.tokens):
        touched = {
            owner[p]
            for p in range(offset, offset + len(token.text))
            if owner[p] >= 0 and raw[p] != "\n"
        }
        offset += len(token.text)
        if not touched:
            continue
        if len(touched) > 1:
            raise TokenBoundaryError(
                f"Trace {record.id}: token {token_index} ({token.text!r}) "
                "straddles a step boundary"
            )
        number = touched.pop()
        if first[number] is None:
            first[number] = token_index
        last[number] = token_index

    spans = []
    for number, (lo, hi) in enumerate(zip(first, last)):
        if lo is None or hi is None:
            raise ValueError(f"Trace {record.id}: character range {number} holds no content")
        spans.append(Span(lo, hi + 1))
    return spans


def _think_bounds(record: TraceRecord) -> Tuple[int, int]:
    raw = record.raw_completion
    opened = raw.count(THINK_OPEN)
    closed = raw.count(THINK_CLOSE)
    if opened == 0 or closed == 0:
        raise MissingThinkTags(f"Trace {record.id}: no {THINK_OPEN}...{THINK_CLOSE} pair")
    if opened > 1 or closed > 1:
        raise MultipleThinkBlocks(
            f"Trace {record.id}: found {opened} opening and {closed} closing think tags"
        )
    start = raw.index(THINK_OPEN) + len(THINK_OPEN)
    end = raw.index(THINK_CLOSE)
    if end < start:
        raise MissingThinkTags(f"Trace {record.id}: {THINK_CLOSE} precedes {THINK_OPEN}")
    return start, end


def segment(record: TraceRecord) -> SegmentedTrace:
    """
    Extract the think region of a trace and split it into steps.

    Args:
        record (TraceRecord)
            A trace holding exactly one ``<think>`` before exactly one ``</think>``.
    Returns:
        The segmented trace; an empty think region yields no steps.
    Raises:
        MissingThinkTags: if the tag pair is absent or reversed.
        MultipleThinkBlocks: if a tag occurs more than once.
        TokenBoundaryError: if a token holds content of two steps.
    """
    start, end = _think_bounds(record)
    ranges = step_char_ranges(record.raw_completion, start, end)
    spans = step_token_spans(record, ranges)
    steps = [
        Step(index=i, token_span=span, text=record.raw_completion[r.start : r.end])  # noqa: E203
        for i, (r, span) in enumerate(zip(ranges, spans))
    ]
    tail = record.raw_completion[end + len(THINK_CLOSE) :]  # noqa: E203
    log.debug("Trace %s: %d step(s) in the think region", record.id, len(steps))
    return SegmentedTrace(source=record, think_span=Span(start, end), steps=steps, tail=tail)
