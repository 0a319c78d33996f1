# SPDX-License-Identifier: GPL-3.0-or-later
import pytest

from cottools._stepentropy.models import RewardComponent
from cottools._stepentropy.reward import (
    RewardConfig,
    correctness_reward,
    extract_answer,
    length_penalty,
    normalized_equal,
    score,
    skip_num_penalty,
    think_text,
)


def think(*steps: str) -> str:
    return "<think>" + "\n\n".join(steps) + "</think>"


SKIP = "[SKIP]"

# (completion, ground truth, token count, (correctness, skip ratio, skip num, length))
FIXTURES = {
    "correct": (think("a", "b") + " \\boxed{5}", "5", 10, (2.0, 0.0, 0.0, 0.0)),
    "wrong": (think("a", "b") + " \\boxed{4}", "5", 10, (0.0, 0.0, 0.0, 0.0)),
    "no-answer": (think("a") + " nothing to see", "5", 10, (0.0, 0.0, 0.0, 0.0)),
    "ratio-at-high": (think(SKIP, SKIP, SKIP, SKIP, "x") + "\\boxed{5}", "5", 9, (2.0, 1.0, 0, 0)),
    "ratio-below-high": (think(SKIP, SKIP, SKIP, "x") + "\\boxed{5}", "5", 9, (2.0, 0.5, 0, 0)),
    "ratio-at-low": (think(SKIP, "x") + "\\boxed{5}", "5", 9, (2.0, 0.5, 0.0, 0.0)),
    "ratio-below-low": (think(SKIP, SKIP, "x", "y", "z") + "\\boxed{5}", "5", 9, (2.0, 0, 0, 0)),
    "all-skipped": (think(SKIP, SKIP, SKIP) + "\\boxed{6}", "5", 9, (0.0, 1.0, 0.0, 0.0)),
    "skips-at-cap": (think(*[SKIP] * 100) + "\\boxed{5}", "5", 300, (2.0, 1.0, 0.0, 0.0)),
    "skips-over-cap": (think(*[SKIP] * 101) + "\\boxed{5}", "5", 300, (2.0, 1.0, -1.0, 0.0)),
    "length-at-cap": (think("a") + "\\boxed{5}", "5", 3500, (2.0, 0.0, 0.0, 0.0)),
    "length-over-cap": (think("a") + "\\boxed{5}", "5", 3501, (2.0, 0.0, 0.0, -1.0)),
    "every-penalty": (think(*[SKIP] * 101) + "\\boxed{1}", "5", 5000, (0.0, 1.0, -1.0, -1.0)),
    "thousands": (think("a") + "\\boxed{1,234}", "1234", 5, (2.0, 0.0, 0.0, 0.0)),
    "frac-vs-decimal": (think("a") + "\\boxed{\\frac{1}{2}}", "0.5", 5, (2.0, 0.0, 0.0, 0.0)),
    "dfrac": (think("a") + "\\boxed{\\dfrac{3}{4}}", "3/4", 5, (2.0, 0.0, 0.0, 0.0)),
    "trailing-zero": (think("a") + "\\boxed{2.50}", "2.5", 5, (2.0, 0.0, 0.0, 0.0)),
    "dollars": (think("a") + "\\boxed{$5$}", "5", 5, (2.0, 0.0, 0.0, 0.0)),
    "last-boxed-wins": ("\\boxed{3} " + think("a") + " \\boxed{4}", "4", 5, (2.0, 0, 0, 0)),
    "number-after-think": (think("7 apples") + " The answer is 12.", "12", 5, (2.0, 0, 0, 0)),
    "number-in-think-only": (think("12 apples") + " done", "12", 5, (0.0, 0.0, 0.0, 0.0)),
    "no-tags-last-number": ("answer 3 then 42", "42", 5, (2.0, 0.0, 0.0, 0.0)),
    "empty-boxed": ("\\boxed{} 7", "7", 5, (2.0, 0.0, 0.0, 0.0)),
    "padded-skip": (think(" [SKIP] ", "x") + "\\boxed{5}", "5", 5, (2.0, 0.5, 0.0, 0.0)),
    "unclosed-think": ("<think>[SKIP]\n\n[SKIP]", "5", 5, (0.0, 1.0, 0.0, 0.0)),
    "open-tag-in-prompt": ("[SKIP]\n\nfoo</think>\\boxed{5}", "5", 5, (2.0, 0.5, 0.0, 0.0)),
    "no-think": ("\\boxed{5}", "5", 5, (2.0, 0.0, 0.0, 0.0)),
    "negative": (think("a") + "\\boxed{-3}", "-3", 5, (2.0, 0.0, 0.0, 0.0)),
}


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_reward_fixtures(name: str) -> None:
    completion, truth, count, expected = FIXTURES[name]
    breakdown = score(completion, truth, count, RewardConfig())

    components = (
        breakdown.correctness,
        breakdown.skip_ratio_reward,
        breakdown.skip_num_penalty,
        breakdown.length_penalty,
    )
    assert components == expected
    assert breakdown.total == sum(expected)
    assert breakdown.diagnostics.token_count_source == "backend"


def test_word_count_fallback() -> None:
    breakdown = score("<think>a b</think> \\boxed{5}", "5", None, RewardConfig(tau_length=2))

    assert breakdown.diagnostics.response_tokens == 3
    assert breakdown.diagnostics.token_count_source == "whitespace"
    assert breakdown.length_penalty == -1.0


def test_diagnostics() -> None:
    breakdown = score(think(SKIP, "x", SKIP, "y") + "\\boxed{5}", "5", 7, RewardConfig())
    diagnostics = breakdown.diagnostics

    assert (diagnostics.n_skip, diagnostics.n_steps) == (2, 4)
    assert diagnostics.ratio == 0.5
    assert diagnostics.extracted_answer == "5"
    assert diagnostics.length_scope == "full_completion"
    assert breakdown.to_record("r1") == {
        "id": "r1",
        "total": 2.5,
        "correctness": 2.0,
        "skip_ratio_reward": 0.5,
        "skip_num_penalty": 0.0,
        "length_penalty": 0.0,
        "n_skip": 2,
        "n_steps": 4,
        "response_tokens": 7,
    }


def test_disabled_components() -> None:
    config = RewardConfig(components=["correctness", "skip_ratio"])
    breakdown = score(think(*[SKIP] * 101) + "\\boxed{5}", "5", 9999, config)

    assert breakdown.skip_num_penalty == 0.0
    assert breakdown.length_penalty == 0.0
    assert breakdown.total == 3.0
    assert RewardComponent.SKIP_NUM not in config.components


def test_custom_skip_token() -> None:
    config = RewardConfig(skip_token="<skip>")
    breakdown = score(think("<skip>", "<skip>", SKIP) + "\\boxed{5}", "5", 5, config)
    assert breakdown.diagnostics.n_skip == 2


def test_custom_comparator() -> None:
    breakdown = score("\\boxed{FIVE}", "five", 1, RewardConfig(), lambda a, b: a.lower() == b)
    assert breakdown.correctness == 2.0


@pytest.mark.parametrize(
    "completion, expected",
    [
        ("\\boxed{42}", "42"),
        ("\\boxed{\\frac{1}{3}}", "1/3"),
        ("<think>3</think>", None),
        ("", None),
        ("x = .5", ".5"),
    ],
)
def test_extract_answer(completion: str, expected) -> None:
    assert extract_answer(completion) == expected


@pytest.mark.parametrize(
    "a, b, equal",
    [("1/2", "0.5", True), ("10", "10.0", True), ("1,000", "1000", True), ("x", "y", False)],
)
def test_normalized_equal(a: str, b: str, equal: bool) -> None:
    assert normalized_equal(a, b) is equal


def test_think_text() -> None:
    assert think_text("<think>a</think>b") == "a"
    assert think_text("<think>a") == "a"
    assert think_text("a</think>b") == "a"
    assert think_text("plain") == ""


def test_invalid_inputs() -> None:
    config = RewardConfig()
    with pytest.raises(ValueError):
        correctness_reward("\\boxed{1}", "  ", config)
    with pytest.raises(ValueError):
        skip_num_penalty(-1, config)
    with pytest.raises(ValueError):
        length_penalty(-1, config)
    with pytest.raises(ValueError):
        RewardConfig(kappa_low=0.9, kappa_high=0.8)
