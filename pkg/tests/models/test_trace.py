# SPDX-License-Identifier: GPL-3.0-or-later
import json

import pytest

from cottools._stepentropy.errors import AlignmentError, MissingEntropySource, SchemaError
from cottools._stepentropy.models import (
    Span,
    Step,
    Strategy,
    TokenRecord,
    parse_trace_line,
    serialize_trace,
    validate_top_logprobs,
)

from ..utils import make_trace


def test_serialize_is_stable() -> None:
    trace = make_trace([[1.0], [0.5, 0.25]])
    line = serialize_trace(trace)
    assert "\n" not in line
    assert parse_trace_line(line) == trace
    assert serialize_trace(parse_trace_line(line)) == line


def test_unknown_fields_go_to_meta() -> None:
    data = json.loads(serialize_trace(make_trace([[1.0]])))
    data["source"] = "gsm8k"
    data["meta"] = {"model": "m"}
    data["tokens"][1]["extra"] = "ignored"

    trace = parse_trace_line(json.dumps(data))

    assert trace.meta == {"model": "m", "source": "gsm8k"}


def test_alignment_error_reports_position() -> None:
    data = json.loads(serialize_trace(make_trace([[1.0]])))
    data["raw_completion"] = data["raw_completion"].replace("s0t0", "s0tX")

    with pytest.raises(AlignmentError, match="character 10"):
        parse_trace_line(json.dumps(data))


@pytest.mark.parametrize(
    "mutate, error",
    [
        (lambda d: d.pop("tokens"), "Missing field"),
        (lambda d: d.update(id=3), "Field id must be a string"),
        (lambda d: d.update(tokens={}), "Field tokens must be a list"),
        (lambda d: d["tokens"][0].update(text=None), r"tokens\[0\].text"),
        (lambda d: d["tokens"][0].update(entropy_bits="high"), "must be a number"),
        (lambda d: d["tokens"][0].update(top_logprobs=[["a"]]), r"\[token, logprob\]"),
    ],
)
def test_schema_errors(mutate, error) -> None:
    data = json.loads(serialize_trace(make_trace([[1.0]])))
    mutate(data)
    with pytest.raises(SchemaError, match=error):
        parse_trace_line(json.dumps(data))


def test_not_json() -> None:
    with pytest.raises(SchemaError, match="Not a JSON record"):
        parse_trace_line("{")


def test_token_needs_entropy_source() -> None:
    with pytest.raises(MissingEntropySource):
        TokenRecord(text="a")

    # SchemaError subclass, so parsing reports it as invalid input
    assert issubclass(MissingEntropySource, SchemaError)


def test_negative_entropy_rejected() -> None:
    with pytest.raises(ValueError):
        TokenRecord(text="a", entropy_bits=-0.5)


@pytest.mark.parametrize("bits", [-0.5, -1e-9, float("nan"), float("inf")])
def test_step_entropy_must_be_finite_and_non_negative(bits: float) -> None:
    with pytest.raises(ValueError):
        Step(index=0, token_span=Span(0, 1), text="x", entropy_bits=bits)


def test_step_entropy() -> None:
    assert Step(index=0, token_span=Span(0, 1), text="x").entropy_bits is None
    assert Step(index=0, token_span=Span(0, 1), text="x", entropy_bits=0).entropy_bits == 0.0
    assert Step(index=1, token_span=Span(1, 3), text="y", entropy_bits="1.5").entropy_bits == 1.5


@pytest.mark.parametrize(
    "pairs",
    [
        [],
        [("a", -1.0), ("b", -0.5)],
        [("a", 0.1)],
        [("a", -0.1), ("b", -0.2), ("c", -0.3)],
        [("a", float("nan"))],
    ],
)
def test_invalid_top_logprobs(pairs) -> None:
    with pytest.raises(ValueError):
        validate_top_logprobs(pairs)


def test_top_logprobs_mass() -> None:
    mass = validate_top_logprobs([("a", -0.5), ("b", -1.5)])
    assert mass == pytest.approx(0.6065306597 + 0.2231301601)


def test_span() -> None:
    span = Span(2, 5)
    assert len(span) == 3
    assert list(span.as_range()) == [2, 3, 4]
    with pytest.raises(ValueError):
        Span(5, 2)


def test_strategy_aliases() -> None:
    assert Strategy.parse("low") == Strategy.LOW_ENTROPY
    assert Strategy.parse(" HIGH ") == Strategy.HIGH_ENTROPY
    assert Strategy.parse("random") == Strategy.RANDOM
    with pytest.raises(ValueError, match="Unknown strategy"):
        Strategy.parse("medium")
