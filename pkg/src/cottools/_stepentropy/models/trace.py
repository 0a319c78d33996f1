# SPDX-License-Identifier: GPL-3.0-or-later
import json
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

from attrs import Attribute, field, frozen
from attrs.validators import deep_iterable, ge, instance_of, optional

from ..errors import AlignmentError, MissingEntropySource, SchemaError
from ..utils import dump_line

LOGPROB_TOLERANCE = 1e-6
"""Slack allowed for positive logprobs and for top-k masses above one."""

LogprobPair = Tuple[str, float]

_REQUIRED_FIELDS = ("id", "problem", "raw_completion", "tokens")
_KNOWN_FIELDS = frozenset(_REQUIRED_FIELDS + ("ground_truth", "meta"))


def validate_top_logprobs(pairs: Sequence[LogprobPair]) -> float:
    """
    Check a list of ``(token, logprob)`` alternatives and return its probability mass.

    Args:
        pairs (list)
            The alternatives as natural-log probabilities, most likely first.
    Returns:
        The sum of the alternatives' probabilities.
    Raises:
        ValueError: if the list is empty, not descending, holds positive logprobs
        beyond the tolerance or its mass exceeds one beyond the tolerance.
    """
    if not pairs:
        raise ValueError("top_logprobs must not be empty")

    previous = math.inf
    for position, (_, logprob) in enumerate(pairs):
        if not math.isfinite(logprob):
            raise ValueError(f"top_logprobs[{position}] is not finite: {logprob}")
        if logprob > LOGPROB_TOLERANCE:
            raise ValueError(f"top_logprobs[{position}] is a positive logprob: {logprob}")
        if logprob > previous:
            raise ValueError("top_logprobs must be sorted in descending order")
        previous = logprob

    mass = math.fsum(math.exp(min(logprob, 0.0)) for _, logprob in pairs)
    if mass > 1.0 + LOGPROB_TOLERANCE:
        raise ValueError(f"top_logprobs probability mass {mass!r} exceeds 1")
    return mass


def _optional_float(value: Any) -> Optional[float]:
    if value is None:
        return None
    return float(value)


def _logprob_pairs(value: Any) -> Optional[Tuple[LogprobPair, ...]]:
    if value is None:
        return None
    return tuple((str(token), float(logprob)) for token, logprob in value)


def _check_entropy_bits(instance: Any, attribute: Attribute, value: Optional[float]) -> None:
    if value is not None and (not math.isfinite(value) or value < 0):
        raise ValueError(f"{attribute.name} must be finite and non-negative, got {value}")


def _check_top_logprobs(instance: Any, attribute: Attribute, value: Any) -> None:
    if value is not None:
        validate_top_logprobs(value)


def _non_empty(instance: Any, attribute: Attribute, value: str) -> None:
    if not value:
        raise SchemaError(f"{attribute.name} must not be empty")


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@frozen
class TokenRecord:
    """One generated token with the information needed to compute its entropy."""

    text: str = field(validator=instance_of(str))
    """The surface form of the token."""

    token_id: Optional[int] = field(default=None, validator=optional(instance_of(int)))
    """The backend tokenizer id, when known."""

    entropy_bits: Optional[float] = field(
        default=None, converter=_optional_float, validator=_check_entropy_bits
    )
    """Precomputed entropy of the next-token distribution, in bits."""

    top_logprobs: Optional[Tuple[LogprobPair, ...]] = field(
        default=None, converter=_logprob_pairs, validator=_check_top_logprobs
    )
    """Natural-log probabilities of the top-k alternatives, most likely first."""

    def __attrs_post_init__(self) -> None:
        if self.entropy_bits is None and self.top_logprobs is None:
            raise MissingEntropySource(
                f"Token {self.text!r} has neither entropy_bits nor top_logprobs"
            )

    def to_dict(self) -> Dict[str, Any]:
        """Return the token as a JSON-compatible dictionary omitting unset fields."""
        out: Dict[str, Any] = {"text": self.text}
        if self.token_id is not None:
            out["token_id"] = self.token_id
        if self.entropy_bits is not None:
            out["entropy_bits"] = self.entropy_bits
        if self.top_logprobs is not None:
            out["top_logprobs"] = [[token, logprob] for token, logprob in self.top_logprobs]
        return out

    @classmethod
    def from_dict(cls, data: Any, position: int = 0) -> "TokenRecord":
        """
        Build a token from its serialized form.

        Args:
            data (dict)
                The deserialized token object.
            position (int, optional)
                The token position, only used in error messages.
        Returns:
            The validated token.
        Raises:
            SchemaError: on missing fields or fields of the wrong type.
            ValueError: on negative entropies or malformed logprobs.
        """
        where = f"tokens[{position}]"
        if not isinstance(data, dict):
            raise SchemaError(f"{where} must be an object")
        if not isinstance(data.get("text"), str):
            raise SchemaError(f"{where}.text must be a string")

        token_id = data.get("token_id")
        if token_id is not None and (not isinstance(token_id, int) or isinstance(token_id, bool)):
            raise SchemaError(f"{where}.token_id must be an integer")

        entropy_bits = data.get("entropy_bits")
        if entropy_bits is not None and not _is_number(entropy_bits):
            raise SchemaError(f"{where}.entropy_bits must be a number")

        top_logprobs = data.get("top_logprobs")
        if top_logprobs is not None:
            if not isinstance(top_logprobs, list):
                raise SchemaError(f"{where}.top_logprobs must be a list")
            for pair in top_logprobs:
                if (
                    not isinstance(pair, list)
                    or len(pair) != 2
                    or not isinstance(pair[0], str)
                    or not _is_number(pair[1])
                ):
                    raise SchemaError(f"{where}.top_logprobs entries must be [token, logprob]")

        return cls(
            text=data["text"],
            token_id=token_id,
            entropy_bits=entropy_bits,
            top_logprobs=top_logprobs,
        )


@frozen
class Span:
    """A half-open ``[start, end)`` range of positions."""

    start: int = field(validator=[instance_of(int), ge(0)])
    end: int = field(validator=instance_of(int))

    @end.validator
    def _check_end(self, attribute: Attribute, value: int) -> None:
        if value < self.start:
            raise ValueError(f"Span end {value} precedes its start {self.start}")

    def __len__(self) -> int:
        return self.end - self.start

    def as_range(self) -> range:
        """Return the positions covered by the span."""
        return range(self.start, self.end)


@frozen
class TraceRecord:
    """One problem instance with the token stream generated for it."""

    id: str = field(validator=[instance_of(str), _non_empty])
    problem: str = field(validator=instance_of(str))
    raw_completion: str = field(validator=instance_of(str))
    tokens: Tuple[TokenRecord, ...] = field(
        converter=tuple, validator=deep_iterable(instance_of(TokenRecord))
    )
    ground_truth: Optional[str] = field(default=None, validator=optional(instance_of(str)))
    meta: Dict[str, Any] = field(factory=dict, validator=instance_of(dict))

    def __attrs_post_init__(self) -> None:
        joined = "".join(token.text for token in self.tokens)
        if joined != self.raw_completion:
            position = next(
                (i for i, (a, b) in enumerate(zip(joined, self.raw_completion)) if a != b),
                min(len(joined), len(self.raw_completion)),
            )
            raise AlignmentError(
                f"Trace {self.id}: token texts diverge from raw_completion at character {position}"
            )

    @property
    def truncated(self) -> bool:
        """Return whether the backend flagged the think region as cut off."""
        return bool(self.meta.get("truncated"))

    def token_offsets(self) -> List[int]:
        """Return the character offset of every token plus the final end offset."""
        offsets = [0]
        for token in self.tokens:
            offsets.append(offsets[-1] + len(token.text))
        return offsets

    def to_dict(self) -> Dict[str, Any]:
        """Return the record in its documented serialized layout."""
        out: Dict[str, Any] = {
            "id": self.id,
            "problem": self.problem,
            "raw_completion": self.raw_completion,
            "tokens": [token.to_dict() for token in self.tokens],
        }
        if self.ground_truth is not None:
            out["ground_truth"] = self.ground_truth
        out["meta"] = dict(sorted(self.meta.items()))
        return out


def trace_from_dict(data: Any) -> TraceRecord:
    """
    Build a validated trace from a deserialized record.

    Unknown top-level fields are kept in ``meta`` without overriding existing keys.
    """
    if not isinstance(data, dict):
        raise SchemaError("A trace record must be a JSON object")

    missing = [key for key in _REQUIRED_FIELDS if key not in data]
    if missing:
        raise SchemaError(f"Missing field(s): {', '.join(missing)}")

    for key in ("id", "problem", "raw_completion"):
        if not isinstance(data[key], str):
            raise SchemaError(f"Field {key} must be a string")
    if not isinstance(data["tokens"], list):
        raise SchemaError("Field tokens must be a list")

    ground_truth = data.get("ground_truth")
    if ground_truth is not None and not isinstance(ground_truth, str):
        raise SchemaError("Field ground_truth must be a string")

    meta = data.get("meta") or {}
    if not isinstance(meta, dict):
        raise SchemaError("Field meta must be an object")
    meta = dict(meta)
    for key in sorted(set(data) - _KNOWN_FIELDS):
        meta.setdefault(key, data[key])

    tokens = [TokenRecord.from_dict(item, position) for position, item in enumerate(data["tokens"])]
    return TraceRecord(
        id=data["id"],
        problem=data["problem"],
        raw_completion=data["raw_completion"],
        tokens=tokens,
        ground_truth=ground_truth,
        meta=meta,
    )


def parse_trace_line(line: str) -> TraceRecord:
    """
    Parse one line of a trace file.

    Args:
        line (str)
            A single serialized record.
    Returns:
        The validated TraceRecord.
    Raises:
        SchemaError: when the line is not a well-formed record.
        AlignmentError: when token texts do not concatenate to the raw completion.
        ValueError: on negative entropies or malformed logprobs.
    """
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"Not a JSON record: {exc}") from None
    return trace_from_dict(data)


def serialize_trace(record: TraceRecord) -> str:
    """Serialize a trace into a single deterministic line without a trailing newline."""
    return dump_line(record.to_dict())


@frozen
class Step:
    """A ``\\n\\n`` delimited reasoning step of the think region."""

    index: int = field(validator=[instance_of(int), ge(0)])
    token_span: Span = field(validator=instance_of(Span))
    text: str = field(validator=instance_of(str))
    entropy_bits: Optional[float] = field(
        default=None, converter=_optional_float, validator=_check_entropy_bits
    )
    """Step entropy in bits, set once the trace has been analyzed."""
