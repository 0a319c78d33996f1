# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import math
from typing import Sequence, Tuple

import numpy as np
from attrs import field, frozen
from attrs.validators import instance_of

from .errors import MissingEntropySource, RangeError
from .models import EntropyMode, Span, TokenRecord, TraceRecord, validate_top_logprobs
from .models.trace import LogprobPair
from .segmenter import SegmentedTrace, segment

log = logging.getLogger("cottools.stepentropy")

NORMALIZATION_TOLERANCE = 1e-6
"""Largest deviation of a distribution's mass from one that is silently renormalized."""

ZERO_PROBABILITY = 1e-15
"""Probabilities below this value contribute nothing to the entropy."""


def _bits(probs: np.ndarray) -> float:
    probs = probs[probs >= ZERO_PROBABILITY]
    entropy = -float(np.sum(probs * np.log2(probs)))
    return max(0.0, entropy)


def token_entropy_from_distribution(probs: Sequence[float]) -> float:
    """
    Compute the Shannon entropy, in bits, of a next-token distribution.

    Args:
        probs (list)
            The probabilities of every outcome.
    Returns:
        The entropy, between zero and the base-2 log of the outcome count.
    Raises:
        ValueError: on empty input, negative or non-finite entries, a zero sum or
        a sum further than the tolerance from one.
    """
    values = np.asarray(probs, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("A distribution needs at least one probability")
    if not np.all(np.isfinite(values)):
        raise ValueError("Probabilities must be finite")
    if np.any(values < 0):
        raise ValueError("Probabilities must not be negative")

    total = math.fsum(values.tolist())
    if total <= 0:
        raise ValueError("Probabilities sum to zero")
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise ValueError(f"Probabilities sum to {total!r}, not 1")

    return min(_bits(values / total), math.log2(values.size))


def topk_tail_mass(top_logprobs: Sequence[LogprobPair]) -> float:
    """Return the probability mass not covered by the top-k alternatives."""
    return max(0.0, 1.0 - validate_top_logprobs(top_logprobs))


def token_entropy_from_topk(top_logprobs: Sequence[LogprobPair]) -> float:
    """
    Compute a lower bound of the token entropy from truncated logprobs.

    The unobserved mass is lumped into a single extra outcome.

    Args:
        top_logprobs (list)
            ``(token, logprob)`` pairs in natural log, most likely first.
    Returns:
        The entropy in bits of the observed outcomes plus the tail bucket.
    Raises:
        ValueError: if the logprobs are not descending, are positive beyond the
        tolerance or their mass exceeds one.
    """
    mass = validate_top_logprobs(top_logprobs)
    probs = np.exp(np.minimum([logprob for _, logprob in top_logprobs], 0.0))
    tail = 1.0 - mass
    if tail > 0:
        probs = np.append(probs, tail)
    else:
        probs = probs / mass
    return _bits(probs)


def step_entropy(per_token_bits: Sequence[float], span: Span) -> float:
    """
    Sum the token entropies over a step's token span.

    Raises:
        RangeError: if the span reaches past the token list.
    """
    if span.end > len(per_token_bits):
        raise RangeError(f"Span {span.start}:{span.end} exceeds {len(per_token_bits)} tokens")
    return math.fsum(per_token_bits[span.start : span.end])  # noqa: E203


@frozen
class EntropyReport:
    """Per-token and per-step entropies of one segmented trace, in bits."""

    per_token_bits: Tuple[float, ...] = field(converter=tuple)
    """Aligned to the trace's tokens."""

    per_step_bits: Tuple[float, ...] = field(converter=tuple)
    """Aligned to the trace's steps."""

    mode: EntropyMode = field(validator=instance_of(EntropyMode))
    step_lengths: Tuple[int, ...] = field(converter=tuple)
    """Token count of every step, so that per-token means can be derived."""

    truncated_tokens: int = 0
    """Tokens whose top-k alternatives left a tail bucket above the tolerance."""


def _token_bits(token: TokenRecord) -> Tuple[float, bool]:
    if token.entropy_bits is not None:
        return token.entropy_bits, False
    if token.top_logprobs is None:
        raise MissingEntropySource(f"Token {token.text!r} has no entropy source")
    truncated = topk_tail_mass(token.top_logprobs) > NORMALIZATION_TOLERANCE
    return token_entropy_from_topk(token.top_logprobs), truncated


def analyze(segmented: SegmentedTrace) -> EntropyReport:
    """
    Compute every token entropy and the step entropies of a segmented trace.

    The report mode is exact only when every token supplied ``entropy_bits``.

    Raises:
        MissingEntropySource: if a token has no entropy source.
    """
    per_token = []
    exact = True
    truncated = 0
    for token in segmented.source.tokens:
        bits, lumped = _token_bits(token)
        per_token.append(bits)
        exact = exact and token.entropy_bits is not None
        truncated += lumped

    per_step = [step_entropy(per_token, step.token_span) for step in segmented.steps]
    mode = EntropyMode.EXACT if exact else EntropyMode.TOPK_LOWER_BOUND
    return EntropyReport(
        per_token_bits=per_token,
        per_step_bits=per_step,
        mode=mode,
        step_lengths=[len(step.token_span) for step in segmented.steps],
        truncated_tokens=truncated,
    )


def measure(record: TraceRecord) -> Tuple[SegmentedTrace, EntropyReport]:
    """Segment a trace, analyze it and return the steps annotated with their entropies."""
    segmented = segment(record)
    report = analyze(segmented)
    return segmented.with_entropies(report.per_step_bits), report
