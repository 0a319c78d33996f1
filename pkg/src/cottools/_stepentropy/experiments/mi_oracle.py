# SPDX-License-Identifier: GPL-3.0-or-later
"""Exact checks of the step information bound on small enumerable models.

For a step ``S_j`` and the answer ``A`` the conditional mutual information given
every other step never exceeds the step's conditional entropy given the steps
before it::

    I(S_j; A | S_other) <= H(S_j | S_before)

and the same holds for a set of steps against the sum of their conditional
entropies. Every quantity is computed by summation over the exact joint
distribution of a synthetic model.
"""
import logging
import math
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np
from attrs import field, frozen
from attrs.validators import deep_iterable, ge, instance_of

from ..backends.synthetic import JointDistribution, SyntheticLm, exact_joint, random_lm
from ..errors import ValidationError
from ..utils import derive_seed

log = logging.getLogger("cottools.stepentropy")

MI_TOLERANCE = 1e-9


@frozen
class StepLayout:
    """How generated symbols split into steps followed by the answer."""

    step_lengths: Tuple[int, ...] = field(
        converter=tuple, validator=deep_iterable(instance_of(int))
    )
    answer_length: int = field(default=1, validator=[instance_of(int), ge(1)])

    @step_lengths.validator
    def _check_lengths(self, attribute: Any, value: Tuple[int, ...]) -> None:
        if not value or min(value) < 1:
            raise ValueError("A layout needs at least one step of positive length")

    @property
    def total(self) -> int:
        """Return the number of symbols the layout covers."""
        return sum(self.step_lengths) + self.answer_length

    def step_columns(self, j: int) -> Tuple[int, ...]:
        """Return the symbol positions of step ``j``."""
        start = sum(self.step_lengths[:j])
        return tuple(range(start, start + self.step_lengths[j]))

    def answer_columns(self) -> Tuple[int, ...]:
        """Return the symbol positions of the answer."""
        start = sum(self.step_lengths)
        return tuple(range(start, start + self.answer_length))

    def columns(self, steps: Iterable[int]) -> Tuple[int, ...]:
        """Return the symbol positions of several steps."""
        return tuple(c for j in sorted(steps) for c in self.step_columns(j))


@frozen
class StepBound:
    """The information carried by one step about the answer, against its bound."""

    step: int
    mi_bits: float
    bound_bits: float
    holds: bool


@frozen
class SubsetBound:
    """The aggregate bound of a set of steps."""

    steps: Tuple[int, ...]
    mi_bits: float
    chain_bits: float
    """Sum of the per-step terms, larger indices first."""

    bound_bits: float
    holds: bool
    chain_matches: bool


class _Entropies:
    """Joint entropies of column groups of an enumerated distribution, cached."""

    def __init__(self, joint: JointDistribution, vocab: Sequence[str], width: int):
        matrix = joint.encoded(vocab)
        if matrix.shape[1] != width or (matrix < 0).any():
            raise ValidationError(f"Every sequence must have exactly {width} symbols")
        self._matrix = matrix + 1
        self._radix = len(vocab) + 1
        self._probs = joint.probs
        self._cache: Dict[FrozenSet[int], float] = {}

    def __call__(self, columns: Iterable[int]) -> float:
        key = frozenset(columns)
        if not key:
            return 0.0
        if key not in self._cache:
            codes = np.zeros(self._matrix.shape[0], dtype=np.int64)
            for column in sorted(key):
                codes = codes * self._radix + self._matrix[:, column]
            _, inverse = np.unique(codes, return_inverse=True)
            marginal = np.bincount(inverse.ravel(), weights=self._probs)
            marginal = marginal[marginal > 0]
            self._cache[key] = max(0.0, float(-(marginal * np.log2(marginal)).sum()))
        return self._cache[key]

    def conditional_mi(self, x: Iterable[int], y: Iterable[int], z: Iterable[int]) -> float:
        """Return I(X; Y | Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z)."""
        x, y, z = set(x), set(y), set(z)
        return self(x | z) + self(y | z) - self(z) - self(x | y | z)

    def conditional_entropy(self, x: Iterable[int], z: Iterable[int]) -> float:
        """Return H(X | Z)."""
        x, z = set(x), set(z)
        return self(x | z) - self(z)


def _step_bound(h: _Entropies, layout: StepLayout, j: int) -> Tuple[float, float]:
    n = len(layout.step_lengths)
    others = layout.columns(k for k in range(n) if k != j)
    before = layout.columns(range(j))
    mi = h.conditional_mi(layout.step_columns(j), layout.answer_columns(), others)
    return mi, h.conditional_entropy(layout.step_columns(j), before)


def subset_bound(h: _Entropies, layout: StepLayout, subset: Iterable[int]) -> SubsetBound:
    """
    Compare the information a set of steps carries about the answer with its bound.

    The chain terms are taken in descending step order: the term of step ``k``
    conditions on every step outside the set and on the set's steps with a
    smaller index, so each term is bounded by the step's own conditional entropy.
    """
    n = len(layout.step_lengths)
    chosen = sorted(set(subset), reverse=True)
    outside = [k for k in range(n) if k not in chosen]
    answer = layout.answer_columns()
    mi = h.conditional_mi(layout.columns(chosen), answer, layout.columns(outside))

    terms = []
    for k in chosen:
        given = outside + [i for i in chosen if i < k]
        terms.append(h.conditional_mi(layout.step_columns(k), answer, layout.columns(given)))
    chain = math.fsum(terms)
    bound = math.fsum(
        h.conditional_entropy(layout.step_columns(k), layout.columns(range(k))) for k in chosen
    )
    return SubsetBound(
        steps=tuple(sorted(chosen)),
        mi_bits=mi,
        chain_bits=chain,
        bound_bits=bound,
        holds=mi <= bound + MI_TOLERANCE,
        chain_matches=abs(chain - mi) <= MI_TOLERANCE,
    )


@frozen
class OracleResult:
    """Per-step and subset bounds of one model."""

    steps: Tuple[StepBound, ...] = field(converter=tuple)
    subsets: Tuple[SubsetBound, ...] = field(converter=tuple)
    sequences: int

    @property
    def holds(self) -> bool:
        """Return whether every bound holds and every chain sum matches."""
        return all(s.holds for s in self.steps) and all(
            s.holds and s.chain_matches for s in self.subsets
        )


def mi_oracle(lm: SyntheticLm, layout: StepLayout) -> OracleResult:
    """
    Check the step information bound exhaustively for one model.

    Every step is checked on its own. The subsets are the prefixes of the steps
    ordered by ascending conditional entropy, the sets a low-entropy pruner
    removes first.

    Raises:
        ExplosionError: if the model has too many sequences to enumerate.
        ValidationError: if the sequences do not match the layout.
    """
    width = layout.total
    joint = exact_joint(lm, len(lm.prefix) + width)
    h = _Entropies(joint, lm.vocab, width)

    steps = []
    for j in range(len(layout.step_lengths)):
        mi, bound = _step_bound(h, layout, j)
        holds = mi <= bound + MI_TOLERANCE
        steps.append(StepBound(step=j, mi_bits=mi, bound_bits=bound, holds=holds))

    ranked = sorted(range(len(steps)), key=lambda j: (steps[j].bound_bits, j))
    subsets = [subset_bound(h, layout, ranked[:size]) for size in range(1, len(ranked) + 1)]
    return OracleResult(steps=steps, subsets=subsets, sequences=len(joint))


@frozen
class AcceptanceResult:
    """The outcome of the bound check over many random models."""

    results: Tuple[OracleResult, ...] = field(converter=tuple)
    layouts: Tuple[StepLayout, ...] = field(converter=tuple)

    @property
    def holds(self) -> bool:
        """Return whether the bound held for every model."""
        return all(r.holds for r in self.results)

    def rows(self) -> List[Dict[str, Any]]:
        """Return one flat record per checked step and subset."""
        out: List[Dict[str, Any]] = []
        for model, result in enumerate(self.results):
            for step in result.steps:
                out.append(
                    {
                        "model": model,
                        "kind": "step",
                        "steps": [step.step],
                        "mi_bits": step.mi_bits,
                        "bound_bits": step.bound_bits,
                        "holds": step.holds,
                    }
                )
            for subset in result.subsets:
                out.append(
                    {
                        "model": model,
                        "kind": "subset",
                        "steps": list(subset.steps),
                        "mi_bits": subset.mi_bits,
                        "chain_bits": subset.chain_bits,
                        "bound_bits": subset.bound_bits,
                        "holds": subset.holds and subset.chain_matches,
                    }
                )
        return out


def random_layout(rng: np.random.Generator, max_total: int = 12) -> StepLayout:
    """Draw three or four steps of two or three symbols fitting ``max_total`` with the answer."""
    n_steps = int(rng.integers(3, 5))
    lengths = [int(rng.integers(2, 4)) for _ in range(n_steps)]
    while sum(lengths) + 1 > max_total:
        lengths[lengths.index(max(lengths))] -= 1
    return StepLayout(step_lengths=lengths, answer_length=1)


def run_mi_acceptance(count: int = 100, seed: int = 0) -> AcceptanceResult:
    """
    Check the bound on ``count`` random models.

    Every model has two to six symbols, order one to three and sparse rows, and
    emits three or four steps followed by a one-symbol answer, twelve symbols at
    most.
    """
    results = []
    layouts = []
    for index in range(count):
        rng = np.random.default_rng(derive_seed(seed, f"lm-{index}"))
        layout = random_layout(rng)
        lm = random_lm(
            rng,
            vocab_size=int(rng.integers(2, 7)),
            order=int(rng.integers(1, 4)),
            max_len=layout.total,
        )
        result = mi_oracle(lm, layout)
        if not result.holds:
            log.warning("Bound violated for model %d", index)
        results.append(result)
        layouts.append(layout)
    log.info("Checked %d model(s)", count)
    return AcceptanceResult(results=results, layouts=layouts)
