# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import math
import re
from fractions import Fraction
from typing import Any, Callable, FrozenSet, Optional, Tuple

from attrs import Attribute, field, frozen
from attrs.validators import ge, instance_of

from .models import RewardComponent
from .models.compressed import unit_interval
from .pruner import DEFAULT_SKIP_TOKEN
from .segmenter import THINK_CLOSE, THINK_OPEN, split_steps

log = logging.getLogger("cottools.stepentropy")

AnswerComparator = Callable[[str, str], bool]
"""Decides whether an extracted answer matches the ground truth."""

LENGTH_SCOPE = "full_completion"

_BOXED = "\\boxed{"
_NUMBER = re.compile(
    r"[-+]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?:/\d+)?(?![\d])|[-+]?\.\d+(?![\d])"
)
_THOUSANDS = re.compile(r"(?<=\d),(?=\d{3}(?!\d))")
_FRAC = re.compile(r"\\[dt]?frac\{([^{}]*)\}\{([^{}]*)\}")


def _components(value: Any) -> FrozenSet[RewardComponent]:
    return frozenset(RewardComponent(v) for v in value)


@frozen
class RewardConfig:
    """Thresholds and magnitudes of the composite reward."""

    kappa_high: float = field(default=0.8, converter=float, validator=unit_interval)
    kappa_low: float = field(default=0.5, converter=float, validator=unit_interval)
    tau_skip_num: int = field(default=100, validator=[instance_of(int), ge(0)])
    tau_length: int = field(default=3500, validator=[instance_of(int), ge(0)])
    correct_reward: float = field(default=2.0, converter=float)
    skip_high_reward: float = field(default=1.0, converter=float)
    skip_mid_reward: float = field(default=0.5, converter=float)
    penalty: float = field(default=-1.0, converter=float)
    skip_token: str = field(default=DEFAULT_SKIP_TOKEN, validator=instance_of(str))
    components: FrozenSet[RewardComponent] = field(
        default=frozenset(RewardComponent), converter=_components
    )
    """Enabled components; disabled ones contribute zero."""

    @kappa_low.validator
    def _check_order(self, attribute: Attribute, value: float) -> None:
        if value > self.kappa_high:
            raise ValueError("kappa_low must not exceed kappa_high")


@frozen
class RewardDiagnostics:
    """Intermediate quantities behind a reward breakdown."""

    n_skip: int
    n_steps: int
    ratio: float
    response_tokens: int
    extracted_answer: Optional[str]
    token_count_source: str = "backend"
    """``backend`` or ``whitespace`` when the count was approximated."""

    length_scope: str = LENGTH_SCOPE


@frozen
class RewardBreakdown:
    """The four reward components of a completion and their sum."""

    correctness: float
    skip_ratio_reward: float
    skip_num_penalty: float
    length_penalty: float
    total: float
    diagnostics: RewardDiagnostics

    def to_record(self, record_id: str) -> dict:
        """Return the line-delimited output record of the ``reward`` command."""
        return {
            "id": record_id,
            "total": self.total,
            "correctness": self.correctness,
            "skip_ratio_reward": self.skip_ratio_reward,
            "skip_num_penalty": self.skip_num_penalty,
            "length_penalty": self.length_penalty,
            "n_skip": self.diagnostics.n_skip,
            "n_steps": self.diagnostics.n_steps,
            "response_tokens": self.diagnostics.response_tokens,
        }


def normalize_answer(answer: str) -> str:
    """
    Normalize an answer for comparison.

    Surrounding whitespace and ``$`` are stripped, thousands separators removed
    and ``\\frac{a}{b}`` rewritten as ``a/b``.
    """
    text = answer.strip().strip("$").strip()
    text = _THOUSANDS.sub("", text)
    text = _FRAC.sub(lambda m: f"{m.group(1).strip()}/{m.group(2).strip()}", text)
    return text.strip()


def _boxed_groups(text: str):
    start = text.find(_BOXED)
    while start >= 0:
        depth = 1
        position = start + len(_BOXED)
        while position < len(text) and depth:
            if text[position] == "{":
                depth += 1
            elif text[position] == "}":
                depth -= 1
            position += 1
        if depth == 0:
            yield text[start + len(_BOXED) : position - 1]  # noqa: E203
        start = text.find(_BOXED, start + len(_BOXED))


def extract_answer(completion: str) -> Optional[str]:
    """
    Extract the final answer of a completion.

    The last balanced ``\\boxed{...}`` group wins; without one, the last numeric
    literal after ``</think>`` (or anywhere when the tag is absent) is used.

    Returns:
        The normalized answer, or None when the completion has none.
    """
    groups = [normalize_answer(g) for g in _boxed_groups(completion)]
    groups = [g for g in groups if g]
    if groups:
        return groups[-1]

    _, closed, after = completion.rpartition(THINK_CLOSE)
    region = after if closed else completion
    numbers = _NUMBER.findall(region)
    if numbers:
        return normalize_answer(numbers[-1])
    return None


def _as_fraction(text: str) -> Optional[Fraction]:
    try:
        return Fraction(text.replace(" ", ""))
    except (ValueError, ZeroDivisionError):
        return None


def normalized_equal(extracted: str, truth: str) -> bool:
    """Compare two answers after normalization, with exact rational equivalence for numbers."""
    a, b = normalize_answer(extracted), normalize_answer(truth)
    if a == b:
        return True
    x, y = _as_fraction(a), _as_fraction(b)
    return x is not None and y is not None and x == y


def correctness_reward(
    completion: str,
    ground_truth: str,
    config: RewardConfig,
    comparator: AnswerComparator = normalized_equal,
) -> float:
    """Return the correct-answer reward when the extracted answer matches the truth."""
    if not ground_truth.strip():
        raise ValueError("ground_truth must not be empty")
    extracted = extract_answer(completion)
    if extracted is None:
        return 0.0
    return config.correct_reward if comparator(extracted, ground_truth) else 0.0


def think_text(completion: str) -> str:
    """
    Return the think region of a completion.

    Text between the tags when both exist; everything after ``<think>`` when the
    region was never closed; the text before ``</think>`` when the opening tag
    was part of the prompt; nothing otherwise.
    """
    opened = completion.find(THINK_OPEN)
    start = opened + len(THINK_OPEN) if opened >= 0 else 0
    closed = completion.find(THINK_CLOSE, start)
    if closed >= 0:
        return completion[start:closed]
    return completion[start:] if opened >= 0 else ""


def skip_ratio_reward(think: str, config: RewardConfig) -> Tuple[float, int, int]:
    """
    Return the tiered skip-ratio reward of a think text.

    Returns:
        The reward, the number of skip steps and the number of steps.
    """
    steps = split_steps(think)
    n_steps = len(steps)
    n_skip = sum(1 for step in steps if step.strip() == config.skip_token)
    ratio = n_skip / max(1, n_steps)
    if ratio >= config.kappa_high:
        return config.skip_high_reward, n_skip, n_steps
    if ratio >= config.kappa_low:
        return config.skip_mid_reward, n_skip, n_steps
    return 0.0, n_skip, n_steps


def skip_num_penalty(n_skip: int, config: RewardConfig) -> float:
    """Penalize completions holding more skip steps than ``tau_skip_num``."""
    if n_skip < 0:
        raise ValueError("n_skip must not be negative")
    return config.penalty if n_skip > config.tau_skip_num else 0.0


def length_penalty(response_tokens: int, config: RewardConfig) -> float:
    """Penalize completions longer than ``tau_length`` tokens."""
    if response_tokens < 0:
        raise ValueError("response_tokens must not be negative")
    return config.penalty if response_tokens > config.tau_length else 0.0


def score(
    completion: str,
    ground_truth: str,
    token_count: Optional[int],
    config: RewardConfig,
    comparator: AnswerComparator = normalized_equal,
) -> RewardBreakdown:
    """
    Compute the composite reward of a completion.

    Args:
        completion (str)
            The full generated text.
        ground_truth (str)
            The expected answer.
        token_count (int, optional)
            The completion's token count reported by its backend. When missing the
            whitespace-separated word count is used and flagged in the diagnostics.
        config (RewardConfig)
            The reward parameters.
        comparator (callable, optional)
            The answer equality check.
    Returns:
        The breakdown whose total is the sum of the enabled components.
    """
    source = "backend"
    if token_count is None:
        token_count = len(completion.split())
        source = "whitespace"

    enabled = config.components
    correctness = 0.0
    if RewardComponent.CORRECTNESS in enabled:
        correctness = correctness_reward(completion, ground_truth, config, comparator)

    ratio_reward, n_skip, n_steps = skip_ratio_reward(think_text(completion), config)
    if RewardComponent.SKIP_RATIO not in enabled:
        ratio_reward = 0.0
    num_penalty = skip_num_penalty(n_skip, config) if RewardComponent.SKIP_NUM in enabled else 0.0
    len_penalty = length_penalty(token_count, config) if RewardComponent.LENGTH in enabled else 0.0

    diagnostics = RewardDiagnostics(
        n_skip=n_skip,
        n_steps=n_steps,
        ratio=n_skip / max(1, n_steps),
        response_tokens=token_count,
        extracted_answer=extract_answer(completion),
        token_count_source=source,
    )
    total = math.fsum([correctness, ratio_reward, num_penalty, len_penalty])
    log.debug("Reward %.2f (%s)", total, diagnostics)
    return RewardBreakdown(
        correctness=correctness,
        skip_ratio_reward=ratio_reward,
        skip_num_penalty=num_penalty,
        length_penalty=len_penalty,
        total=total,
        diagnostics=diagnostics,
    )
