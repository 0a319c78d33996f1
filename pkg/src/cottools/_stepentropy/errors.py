# SPDX-License-Identifier: GPL-3.0-or-later
"""Exceptions raised by the step entropy toolkit."""


class StepEntropyError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StepEntropyError, ValueError):
    """Input data violates one of the declared invariants."""


class SchemaError(ValidationError):
    """A serialized record has a missing field or a field of the wrong type."""


class MissingEntropySource(SchemaError):
    """A token carries neither ``entropy_bits`` nor ``top_logprobs``."""


class AlignmentError(ValidationError):
    """Token texts do not concatenate to the record's raw completion."""


class MissingThinkTags(ValidationError):
    """The completion lacks a ``<think>`` ... ``</think>`` pair."""


class MultipleThinkBlocks(ValidationError):
    """The completion holds more than one think tag of a kind."""


class TokenBoundaryError(ValidationError):
    """A single token holds content characters from two different steps."""


class PlanMismatch(ValidationError):
    """A prune plan does not match the step count of the trace it is applied to."""


class ExplosionError(ValidationError):
    """Exhaustive enumeration of a synthetic model exceeds the enumeration bound."""


class NonTermination(ValidationError):
    """A synthetic model did not close its think region within the length cap."""


class RangeError(StepEntropyError, IndexError):
    """A token range lies outside the token list it refers to."""


class BackendError(StepEntropyError):
    """Base class for failures of a trace producing backend."""


class TransportError(BackendError):
    """The endpoint could not be reached or kept failing after the bounded retries."""


class AuthError(BackendError):
    """The endpoint rejected the credentials or no API key is available."""


class ProtocolError(BackendError):
    """The endpoint answered with a payload that does not follow the completions protocol."""


class TruncationError(BackendError):
    """The completion hit ``max_tokens`` before closing its think region."""
