# SPDX-License-Identifier: GPL-3.0-or-later
import math
from collections import defaultdict

import numpy as np
import pytest

from cottools._stepentropy.backends import SyntheticLm, exact_joint, random_lm, synth_generate
from cottools._stepentropy.backends import synthetic
from cottools._stepentropy.backends.synthetic import START
from cottools._stepentropy.entropy import measure, token_entropy_from_distribution
from cottools._stepentropy.errors import ExplosionError, NonTermination, ValidationError
from cottools._stepentropy.models import EntropyMode

VOCAB = ("<think>", "x", "y", "\n\n", "</think>", "1")

ROWS = {
    ("<think>",): (("x", 0.5), ("y", 0.5)),
    ("x",): (("\n\n", 0.6), ("</think>", 0.4)),
    ("y",): (("\n\n", 0.5), ("</think>", 0.5)),
    ("\n\n",): (("x", 0.25), ("y", 0.75)),
    ("</think>",): (("1", 1.0),),
}


def binary_entropy(p: float) -> float:
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def stepwise_lm(**kwargs) -> SyntheticLm:
    return SyntheticLm(vocab=VOCAB, order=1, rows=ROWS, seed=7, **kwargs)


def coin_lm(max_len: int = 5) -> SyntheticLm:
    row = (("a", 0.5), ("b", 0.5))
    return SyntheticLm(
        vocab=("a", "b"),
        order=1,
        rows={(START,): row, ("a",): row, ("b",): row},
        prefix=(),
        answer_length=0,
        max_len=max_len,
    )


def generated_traces(lm: SyntheticLm, wanted: int):
    out = []
    for problem_id in range(50):
        try:
            out.append(synth_generate(problem_id, lm))
        except NonTermination:
            continue
        if len(out) == wanted:
            break
    assert len(out) == wanted
    return out


def test_generate_is_deterministic() -> None:
    lm = stepwise_lm()
    assert synth_generate("p", lm) == synth_generate("p", lm)
    assert synth_generate("p", lm) == synth_generate("p", stepwise_lm())


def test_generated_trace_shape() -> None:
    for trace in generated_traces(stepwise_lm(), 5):
        assert trace.raw_completion.startswith("<think>")
        assert trace.raw_completion.endswith("</think>1")
        assert trace.ground_truth == "1"
        assert trace.tokens[0].entropy_bits == 0.0

        segmented, report = measure(trace)
        assert report.mode == EntropyMode.EXACT
        assert [s.text for s in segmented.steps] == [
            t.text for t in trace.tokens if t.text in ("x", "y")
        ]
        # the first step is drawn after <think>, all others after a delimiter
        expected = [1.0] + [binary_entropy(0.25)] * (len(segmented.steps) - 1)
        assert report.per_step_bits == pytest.approx(expected)


def test_token_entropies_match_joint_conditionals() -> None:
    lm = stepwise_lm(max_len=10)
    joint = exact_joint(lm, lm.max_len)

    for trace in generated_traces(lm, 4):
        generated = [t.text for t in trace.tokens[len(lm.prefix) :]]  # noqa: E203
        for position, token in enumerate(trace.tokens[len(lm.prefix) :]):  # noqa: E203
            conditional = defaultdict(float)
            for sequence, prob in zip(joint.sequences, joint.probs):
                if len(sequence) > position and list(sequence[:position]) == generated[:position]:
                    conditional[sequence[position]] += prob
            total = math.fsum(conditional.values())
            probs = [p / total for p in conditional.values()]
            assert token.entropy_bits == pytest.approx(
                token_entropy_from_distribution(probs), abs=1e-9
            )


def test_exact_joint_is_a_distribution() -> None:
    joint = exact_joint(stepwise_lm(), 6)

    assert math.fsum(joint.probs.tolist()) == pytest.approx(1.0, abs=1e-12)
    assert len(set(joint.sequences)) == len(joint)
    assert all(len(s) <= 5 for s in joint.sequences)

    by_sequence = dict(zip(joint.sequences, joint.probs.tolist()))
    assert by_sequence[("x", "</think>", "1")] == pytest.approx(0.2)
    assert by_sequence[("y", "</think>", "1")] == pytest.approx(0.25)


def test_encoded_joint() -> None:
    joint = exact_joint(stepwise_lm(), 4)
    encoded = joint.encoded(VOCAB)

    assert encoded.shape == (len(joint), 3)
    first = joint.sequences[0]
    assert [VOCAB[i] for i in encoded[0, : len(first)]] == list(first)
    assert np.all(encoded[0, len(first) :] == -1)  # noqa: E203


def test_explosion(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(synthetic, "MAX_SEQUENCES", 10)
    assert len(exact_joint(coin_lm(max_len=3), 3)) == 8
    with pytest.raises(ExplosionError):
        exact_joint(coin_lm(), 5)


def test_non_termination() -> None:
    with pytest.raises(NonTermination):
        synth_generate(0, coin_lm())


@pytest.mark.parametrize(
    "rows",
    [
        {**ROWS, ("x",): (("\n\n", 0.6), ("</think>", 0.3))},
        {**ROWS, ("x",): (("\n\n", 1.2), ("</think>", -0.2))},
        {**ROWS, ("x",): (("z", 1.0),)},
        {**ROWS, ("z",): (("x", 1.0),)},
        {key: value for key, value in ROWS.items() if key != ("\n\n",)},
    ],
    ids=["mass", "negative", "unknown-symbol", "unknown-context", "unreachable-gap"],
)
def test_invalid_models(rows) -> None:
    with pytest.raises(ValidationError):
        SyntheticLm(vocab=VOCAB, order=1, rows=rows)


def test_random_lm() -> None:
    lm = random_lm(np.random.default_rng(3), vocab_size=3, order=2, max_len=4)

    assert lm.vocab == ("a", "b", "c")
    assert len(lm.rows) == 16
    for row in lm.rows.values():
        assert 1 <= len(row) <= 3
        assert math.fsum(p for _, p in row) == pytest.approx(1.0, abs=1e-12)

    joint = exact_joint(lm, lm.max_len)
    assert all(len(s) == 4 for s in joint.sequences)
    assert math.fsum(joint.probs.tolist()) == pytest.approx(1.0, abs=1e-12)

    same = random_lm(np.random.default_rng(3), vocab_size=3, order=2, max_len=4)
    assert same.rows == lm.rows
