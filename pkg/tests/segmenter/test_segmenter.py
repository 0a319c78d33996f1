# SPDX-License-Identifier: GPL-3.0-or-later
from typing import List

import pytest

from cottools._stepentropy.errors import (
    MissingThinkTags,
    MultipleThinkBlocks,
    TokenBoundaryError,
)
from cottools._stepentropy.models import Span, TokenRecord, TraceRecord
from cottools._stepentropy.segmenter import segment, split_steps, step_char_ranges

from ..utils import make_trace


def trace_of(texts: List[str]) -> TraceRecord:
    tokens = [TokenRecord(text=t, entropy_bits=0.0) for t in texts]
    return TraceRecord(
        id="t", problem="p", raw_completion="".join(texts), tokens=tokens, ground_truth="1"
    )


def test_steps_and_token_spans() -> None:
    segmented = segment(make_trace([[1.0], [0.5, 0.25]]))

    assert [s.text for s in segmented.steps] == ["s0t0", "s1t0 s1t1"]
    assert [s.token_span for s in segmented.steps] == [Span(1, 2), Span(3, 5)]
    assert [s.index for s in segmented.steps] == [0, 1]
    assert segmented.think_token_count == 3
    assert segmented.tail == " \\boxed{5}"
    assert segmented.think_text == "s0t0\n\ns1t0 s1t1"


def test_empty_think_region() -> None:
    segmented = segment(trace_of(["<think>", "</think>", "5"]))
    assert segmented.steps == ()
    assert segmented.think_token_count == 0


def test_newline_runs_and_edges() -> None:
    segmented = segment(
        trace_of(["<think>", "\n", "foo", "\n\n\n", "bar", "\n", "baz", "\n", "</think>"])
    )
    assert [s.text for s in segmented.steps] == ["foo", "bar\nbaz"]
    assert [s.token_span for s in segmented.steps] == [Span(2, 3), Span(4, 7)]


def test_tokens_sharing_tag_and_content() -> None:
    segmented = segment(trace_of(["<think>a", "\n\n", "b</think>", " 1"]))
    assert [s.text for s in segmented.steps] == ["a", "b"]
    assert [s.token_span for s in segmented.steps] == [Span(0, 1), Span(2, 3)]


@pytest.mark.parametrize(
    "texts,position",
    [
        (["<think>", "a\n\nb", "</think>"], 1),
        (["<think>", "a", "\n\n", "b", " c\n\nd", "</think>"], 4),
        (["<think>a\n\nb", "</think>"], 0),
    ],
)
def test_token_straddling_steps(texts: List[str], position: int) -> None:
    with pytest.raises(TokenBoundaryError, match=f"token {position} .* straddles a step boundary"):
        segment(trace_of(texts))


def test_token_spanning_only_newlines_is_accepted() -> None:
    segmented = segment(trace_of(["<think>", "a", "\n\n\n", "b", "</think>"]))
    assert [s.text for s in segmented.steps] == ["a", "b"]


@pytest.mark.parametrize(
    "texts",
    [
        ["no tags at all"],
        ["<think>", "open only"],
        ["closed only", "</think>"],
        ["</think>", "x", "<think>"],
    ],
)
def test_missing_tags(texts: List[str]) -> None:
    with pytest.raises(MissingThinkTags):
        segment(trace_of(texts))


def test_multiple_blocks() -> None:
    with pytest.raises(MultipleThinkBlocks):
        segment(trace_of(["<think>", "a", "</think>", "<think>", "b", "</think>"]))


@pytest.mark.parametrize(
    "text, expected",
    [
        ("", []),
        ("a", ["a"]),
        ("a\n\nb", ["a", "b"]),
        ("a\n\n\n\nb\n\n  \n\nc", ["a", "b", "c"]),
        ("x\ny\n\nz", ["x\ny", "z"]),
        ("\n\na\n\n", ["a"]),
        ("[SKIP]\n\n[SKIP]\n\nkept", ["[SKIP]", "[SKIP]", "kept"]),
    ],
)
def test_split_steps(text: str, expected: List[str]) -> None:
    assert split_steps(text) == expected


def test_char_ranges_within_window() -> None:
    text = "<think>a\n\nbc</think>"
    assert step_char_ranges(text, 7, 12) == [Span(7, 8), Span(10, 12)]


def test_with_entropies_checks_length() -> None:
    segmented = segment(make_trace([[1.0], [2.0]]))
    annotated = segmented.with_entropies([1.0, 2.0])
    assert [s.entropy_bits for s in annotated.steps] == [1.0, 2.0]
    with pytest.raises(ValueError):
        segmented.with_entropies([1.0])
