# SPDX-License-Identifier: GPL-3.0-or-later
import hashlib
import logging
import os
import threading
from concurrent.futures import Future
from functools import partial
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np
import requests
from attrs import field, frozen
from attrs.validators import ge, instance_of
from more_executors import Executors
from more_executors.futures import f_map
from more_executors.retry import ExceptionRetryPolicy

from ..errors import AuthError, ProtocolError, TransportError, TruncationError
from ..models import TokenRecord, TraceRecord
from ..segmenter import THINK_CLOSE, THINK_OPEN
from ..utils import chunked
from .base import Backend, register_backend

log = logging.getLogger("cottools.stepentropy")

SCAFFOLD = THINK_OPEN + "\n"
"""Inserted after the problem to open the think region."""

TokenEntry = Tuple[str, Optional[float], List[Tuple[str, float]]]


@frozen
class RetryConfig:
    """Bounded retries with exponential backoff."""

    max_attempts: int = field(default=5, validator=[instance_of(int), ge(1)])
    base_backoff_ms: int = field(default=500, validator=[instance_of(int), ge(0)])
    max_backoff_ms: int = field(default=30000, validator=[instance_of(int), ge(0)])


def _retry_config(value: Any) -> RetryConfig:
    if isinstance(value, dict):
        return RetryConfig(**value)
    return value


@frozen
class BackendConfig:
    """Connection and sampling parameters of an OpenAI-compatible completions endpoint."""

    endpoint_url: str = field(default="http://localhost:8000/v1", validator=instance_of(str))
    api_key_env: str = field(default="OPENAI_API_KEY", validator=instance_of(str))
    """Name of the environment variable holding the API key; the key itself is never stored."""

    model: str = field(default="default", validator=instance_of(str))
    top_logprobs_k: int = field(default=20, validator=[instance_of(int), ge(1)])
    max_tokens: int = field(default=4096, validator=[instance_of(int), ge(1)])
    temperature: float = field(default=0.6, converter=float, validator=ge(0.0))
    max_in_flight: int = field(default=4, validator=[instance_of(int), ge(1)])
    retry: RetryConfig = field(
        factory=RetryConfig, converter=_retry_config, validator=instance_of(RetryConfig)
    )
    timeout: float = field(default=120.0, converter=float, validator=ge(0.0))
    strict_truncation: bool = field(default=False, validator=instance_of(bool))
    """Raise TruncationError instead of flagging traces that never close their think region."""


class JitterRetryPolicy(ExceptionRetryPolicy):
    """Retry transport failures with exponential backoff and full jitter."""

    def __init__(self, retry: RetryConfig, seed: Optional[int] = None):
        """
        Create the policy.

        Args:
            retry (RetryConfig)
                The attempt cap and backoff bounds.
            seed (int, optional)
                Seed of the jitter generator.
        """
        super(JitterRetryPolicy, self).__init__(
            max_attempts=retry.max_attempts,
            exponent=2.0,
            sleep=retry.base_backoff_ms / 1000.0,
            max_sleep=retry.max_backoff_ms / 1000.0,
            exception_base=TransportError,
        )
        self._rng = np.random.default_rng(seed)
        self._lock = threading.Lock()

    def sleep_time(self, attempt, future):
        """Return a uniform draw between zero and the exponential backoff ceiling."""
        ceiling = super(JitterRetryPolicy, self).sleep_time(attempt, future)
        with self._lock:
            return float(self._rng.uniform(0.0, ceiling)) if ceiling > 0 else 0.0


def _descending(alternatives: Iterable[Tuple[str, float]]) -> List[Tuple[str, float]]:
    return sorted(alternatives, key=lambda pair: -pair[1])


def _legacy_entries(logprobs: Dict[str, Any]) -> List[TokenEntry]:
    tokens = logprobs.get("tokens") or []
    token_logprobs = logprobs.get("token_logprobs") or [None] * len(tokens)
    top = logprobs.get("top_logprobs") or [None] * len(tokens)
    if not (len(tokens) == len(token_logprobs) == len(top)):
        raise ProtocolError("logprobs arrays have different lengths")
    out = []
    for token, logprob, alternatives in zip(tokens, token_logprobs, top):
        pairs = [(str(k), float(v)) for k, v in (alternatives or {}).items()]
        out.append((token, logprob, pairs))
    return out


def _content_entries(content: List[Dict[str, Any]]) -> List[TokenEntry]:
    out = []
    for item in content:
        pairs = [(str(a["token"]), float(a["logprob"])) for a in item.get("top_logprobs") or []]
        out.append((item["token"], item.get("logprob"), pairs))
    return out


def token_entries(logprobs: Any) -> List[TokenEntry]:
    """
    Read the per-token logprob information of a completion choice.

    Both the legacy ``tokens``/``token_logprobs``/``top_logprobs`` arrays and the
    ``content`` list layout are understood.

    Raises:
        ProtocolError: if the logprobs are missing or malformed.
    """
    if not isinstance(logprobs, dict):
        raise ProtocolError("Response lacks logprobs")
    try:
        if "content" in logprobs and logprobs["content"] is not None:
            return _content_entries(logprobs["content"])
        if "tokens" in logprobs:
            return _legacy_entries(logprobs)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ProtocolError(f"Malformed logprobs: {exc}") from exc
    raise ProtocolError("Response lacks per-token logprobs")


class CompletionsClient(Backend):
    """Client for OpenAI-compatible ``/completions`` endpoints returning logprobs."""

    name = "completions"

    def __init__(self, config: BackendConfig):
        """
        Create a new client.

        Args:
            config (BackendConfig)
                Endpoint, sampling and concurrency settings. At most
                ``max_in_flight`` requests are ever outstanding.
        """
        self._config = config
        self._url = config.endpoint_url.rstrip("/") + "/completions"
        self._tls = threading.local()
        self._executor = Executors.thread_pool(
            name="cottools-stepentropy-completions", max_workers=config.max_in_flight
        ).with_retry(retry_policy=JitterRetryPolicy(config.retry))

    @property
    def config(self) -> BackendConfig:
        """Return the client configuration."""
        return self._config

    def settings(self) -> Dict[str, Any]:
        """Return the endpoint and sampling settings shaping the answers."""
        config = self._config
        return {
            "endpoint_url": config.endpoint_url,
            "model": config.model,
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
        }

    def _api_key(self) -> str:
        key = os.environ.get(self._config.api_key_env)
        if not key:
            raise AuthError(f"Environment variable {self._config.api_key_env} holds no API key")
        return key

    @property
    def _session(self) -> requests.Session:
        if not hasattr(self._tls, "session"):
            session = requests.Session()
            session.headers["Authorization"] = f"Bearer {self._api_key()}"
            self._tls.session = session
        return self._tls.session

    def _post(self, body: Dict[str, Any]) -> Dict[str, Any]:
        try:
            response = self._session.post(self._url, json=body, timeout=self._config.timeout)
        except requests.RequestException as exc:
            log.warning("Request to %s failed: %s", self._url, exc)
            raise TransportError(f"Request to {self._url} failed: {exc}") from exc

        status = response.status_code
        if status in (401, 403):
            raise AuthError(f"{self._url} rejected the credentials ({status})")
        if status == 429 or status >= 500:
            log.warning("%s answered %d, retrying", self._url, status)
            raise TransportError(f"{self._url} answered {status}")
        if not response.ok:
            raise ProtocolError(f"{self._url} answered {status}: {response.text[:200]}")

        try:
            payload = response.json()
        except ValueError as exc:
            raise ProtocolError(f"{self._url} answered with invalid JSON") from exc
        log.debug("Completion payload: %s", payload)
        return payload

    @staticmethod
    def _first_choice(payload: Any) -> Dict[str, Any]:
        choices = payload.get("choices") if isinstance(payload, dict) else None
        if not choices or not isinstance(choices, list) or not isinstance(choices[0], dict):
            raise ProtocolError("Response has no choices")
        return choices[0]

    def _to_trace(
        self, record_id: str, problem: str, ground_truth: Optional[str], payload: Any
    ) -> TraceRecord:
        choice = self._first_choice(payload)
        entries = token_entries(choice.get("logprobs"))
        generated = "".join(token for token, _, _ in entries)

        tokens = []
        scaffolded = not generated.startswith(THINK_OPEN)
        if scaffolded:
            tokens.append(TokenRecord(text=SCAFFOLD, entropy_bits=0.0))
        try:
            for token, logprob, alternatives in entries:
                if not alternatives:
                    if logprob is None:
                        raise ProtocolError(f"Token {token!r} carries no logprob")
                    alternatives = [(token, float(logprob))]
                tokens.append(TokenRecord(text=token, top_logprobs=_descending(alternatives)))
        except ValueError as exc:
            raise ProtocolError(f"Malformed logprobs: {exc}") from exc

        truncated = THINK_CLOSE not in generated
        if truncated:
            message = f"Trace {record_id}: no {THINK_CLOSE} within {self._config.max_tokens} tokens"
            if self._config.strict_truncation:
                raise TruncationError(message)
            log.warning(message)

        meta = {
            "model": self._config.model,
            "temperature": self._config.temperature,
            "max_tokens": self._config.max_tokens,
            "top_logprobs_k": self._config.top_logprobs_k,
            "finish_reason": choice.get("finish_reason"),
            "scaffold_tokens": 1 if scaffolded else 0,
            "truncated": truncated,
        }
        return TraceRecord(
            id=record_id,
            problem=problem,
            raw_completion="".join(t.text for t in tokens),
            tokens=tokens,
            ground_truth=ground_truth,
            meta=meta,
        )

    def fetch_trace_async(
        self, problem: str, record_id: Optional[str] = None, ground_truth: Optional[str] = None
    ) -> "Future[TraceRecord]":
        """
        Request a completion with logprobs for a problem.

        Args:
            problem (str)
                The user query.
            record_id (str, optional)
                The trace id; derived from the problem text when omitted.
            ground_truth (str, optional)
                The expected answer, copied to the trace.
        Returns:
            A future resolving to the validated trace. It fails with TransportError
            after the bounded retries, AuthError, ProtocolError or TruncationError.
        """
        if record_id is None:
            record_id = "trace-" + hashlib.sha256(problem.encode("utf-8")).hexdigest()[:12]
        body = {
            "model": self._config.model,
            "prompt": problem + "\n" + SCAFFOLD,
            "max_tokens": self._config.max_tokens,
            "temperature": self._config.temperature,
            "logprobs": self._config.top_logprobs_k,
            "echo": False,
        }
        out = self._executor.submit(self._post, body)
        return f_map(out, fn=partial(self._to_trace, record_id, problem, ground_truth))

    def fetch_trace(
        self, problem: str, record_id: Optional[str] = None, ground_truth: Optional[str] = None
    ) -> TraceRecord:
        """Blocking variant of :meth:`fetch_trace_async`."""
        return self.fetch_trace_async(problem, record_id, ground_truth).result()

    def fetch_many(
        self, problems: Iterable[Tuple[str, str, Optional[str]]]
    ) -> Iterator[TraceRecord]:
        """
        Collect traces for ``(id, problem, ground_truth)`` triples, preserving input order.

        Requests are submitted in bounded windows so memory stays constant.
        """
        for chunk in chunked(problems, self._config.max_in_flight * 4):
            futures = [self.fetch_trace_async(p, i, g) for i, p, g in chunk]
            for future in futures:
                yield future.result()

    def answer(self, prompt: str) -> str:
        """Continue a compressed-inference prompt without requesting logprobs."""
        body = {
            "model": self._config.model,
            "prompt": prompt,
            "max_tokens": self._config.max_tokens,
            "temperature": self._config.temperature,
            "echo": False,
        }
        payload = self._executor.submit(self._post, body).result()
        text = self._first_choice(payload).get("text")
        if not isinstance(text, str):
            raise ProtocolError("Response choice has no text")
        return text


register_backend(CompletionsClient, "completions", "backend")
