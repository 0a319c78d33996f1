# SPDX-License-Identifier: GPL-3.0-or-later
import itertools
import logging
import math
from collections import defaultdict, deque
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from attrs import field, frozen
from attrs.validators import ge, instance_of, le
from numpy.random import PCG64

from ..entropy import token_entropy_from_distribution
from ..errors import ExplosionError, NonTermination, ValidationError
from ..models import TokenRecord, TraceRecord
from ..pruner import DEFAULT_SKIP_TOKEN
from ..reward import think_text
from ..segmenter import STEP_DELIMITER, THINK_CLOSE, THINK_OPEN, split_steps
from ..utils import derive_seed, unit_draw
from .base import Backend

log = logging.getLogger("cottools.stepentropy")

START = "<s>"
"""Padding symbol of contexts shorter than the model order."""

MAX_SEQUENCES = 10**7
ROW_TOLERANCE = 1e-12

Context = Tuple[str, ...]
Row = Tuple[Tuple[str, float], ...]


def _rows(value: Any) -> Dict[Context, Row]:
    return {
        tuple(context): tuple((str(symbol), float(p)) for symbol, p in row)
        for context, row in dict(value).items()
    }


@frozen(eq=False)
class SyntheticLm:
    """
    A bounded-context language model with exact conditional distributions.

    Generation starts after ``prefix`` and stops ``answer_length`` symbols after
    ``</think>`` or once ``max_len`` symbols exist.
    """

    vocab: Tuple[str, ...] = field(converter=tuple)
    order: int = field(validator=[instance_of(int), ge(1), le(3)])
    rows: Dict[Context, Row] = field(converter=_rows)
    """Next-symbol distributions keyed by the last ``order`` symbols."""

    seed: int = field(default=0, validator=[instance_of(int), ge(0)])
    prefix: Tuple[str, ...] = field(default=(THINK_OPEN,), converter=tuple)
    answer_length: int = field(default=1, validator=[instance_of(int), ge(0)])
    max_len: int = field(default=256, validator=[instance_of(int), ge(1)])

    def __attrs_post_init__(self) -> None:
        known = set(self.vocab) | {START}
        for context, row in self.rows.items():
            if len(context) != self.order or not set(context) <= known:
                raise ValidationError(f"Invalid context {context!r}")
            if not row or any(p < 0 or s not in self.vocab for s, p in row):
                raise ValidationError(f"Invalid row for context {context!r}")
            total = math.fsum(p for _, p in row)
            if abs(total - 1.0) > ROW_TOLERANCE:
                raise ValidationError(f"Row for context {context!r} sums to {total!r}")
        self._check_reachable()

    def _check_reachable(self) -> None:
        start = (self.context(self.prefix), None)
        seen = {start}
        queue = deque([start])
        while queue:
            context, remaining = queue.popleft()
            if remaining == 0:
                continue
            for symbol, p in self.row(context):
                if p == 0:
                    continue
                if remaining is not None:
                    after: Optional[int] = remaining - 1
                elif symbol == THINK_CLOSE:
                    after = self.answer_length
                else:
                    after = None
                state = (self.advance(context, symbol), after)
                if state not in seen:
                    seen.add(state)
                    queue.append(state)

    def advance(self, context: Context, symbol: str) -> Context:
        """Return the context following ``symbol`` emitted in ``context``."""
        return (context + (symbol,))[-self.order :]  # noqa: E203

    def context(self, history: Sequence[str]) -> Context:
        """Return the conditioning context following ``history``."""
        padded = (START,) * self.order + tuple(history)
        return padded[-self.order :]  # noqa: E203

    def row(self, context: Context) -> Row:
        """Return the next-symbol distribution of a context."""
        try:
            return self.rows[context]
        except KeyError:
            raise ValidationError(f"No distribution for reachable context {context!r}") from None

    def row_entropy(self, context: Context) -> float:
        """Return the exact entropy, in bits, of a context's next-symbol distribution."""
        return token_entropy_from_distribution([p for _, p in self.row(context)])


def _sample(row: Row, u: float) -> str:
    cumulative = 0.0
    chosen = None
    for symbol, p in row:
        if p <= 0:
            continue
        chosen = symbol
        cumulative += p
        if u < cumulative:
            break
    assert chosen is not None
    return chosen


def synth_generate(problem_id: Any, lm: SyntheticLm) -> TraceRecord:
    """
    Sample a trace from a synthetic model.

    Every token carries the exact entropy of the row it was drawn from; prefix
    tokens are deterministic. The sampling stream is derived from the model seed
    and the problem id, so the same inputs always give the same trace.

    Raises:
        NonTermination: if the think region is still open at ``max_len`` symbols.
    """
    generator = PCG64(derive_seed(lm.seed, str(problem_id)))
    history: List[str] = list(lm.prefix)
    tokens = [TokenRecord(text=symbol, entropy_bits=0.0) for symbol in history]
    remaining: Optional[int] = None
    answer: List[str] = []

    while remaining != 0:
        if len(history) >= lm.max_len:
            raise NonTermination(
                f"Synthetic problem {problem_id}: no {THINK_CLOSE} within {lm.max_len} symbols"
            )
        context = lm.context(history)
        symbol = _sample(lm.row(context), unit_draw(generator))
        tokens.append(TokenRecord(text=symbol, entropy_bits=lm.row_entropy(context)))
        history.append(symbol)
        if remaining is not None:
            remaining -= 1
            answer.append(symbol)
        elif symbol == THINK_CLOSE:
            remaining = lm.answer_length

    return TraceRecord(
        id=str(problem_id),
        problem=f"Synthetic problem {problem_id}",
        raw_completion="".join(history),
        tokens=tokens,
        ground_truth="".join(answer).strip() or None,
        meta={"model": "synthetic", "order": lm.order, "seed": lm.seed},
    )


# (context, symbols generated so far including the prefix)
State = Tuple[Context, int]
# (step text, symbol ending the step, state after that symbol, probability)
StepPath = Tuple[str, str, State, float]


class ExactReader(Backend):
    """
    Answer prompts with the most probable continuation of a synthetic model.

    The think region of the prompt is read step by step. A skip marker stands for
    one unseen step, or for a run of them when ``collapse`` is set; every other
    step must be a complete step of the model. The model's distribution over the
    ``answer_length`` symbols after ``</think>`` is summed over every way the unseen
    steps could have been generated and its most probable answer is returned, the
    lexicographically first one on ties. A prompt the model cannot produce has no
    continuation and gets an empty answer.
    """

    name = "exact"

    def __init__(
        self, lm: SyntheticLm, skip_token: str = DEFAULT_SKIP_TOKEN, collapse: bool = False
    ):
        self.lm = lm
        self.skip_token = skip_token
        self.collapse = collapse
        self._paths: Dict[State, List[StepPath]] = {}

    def _step_paths(self, state: State) -> List[StepPath]:
        paths = self._paths.get(state)
        if paths is None:
            paths = self._paths.setdefault(state, list(self._enumerate_steps(state)))
        return paths

    def _enumerate_steps(self, state: State) -> Iterable[StepPath]:
        # Empty steps are invisible once rendered and are not followed.
        lm = self.lm
        stack = [(state, "", 1.0)]
        while stack:
            (context, length), text, prob = stack.pop()
            if length >= lm.max_len:
                continue
            for symbol, p in lm.row(context):
                if p <= 0:
                    continue
                after = (lm.advance(context, symbol), length + 1)
                if symbol == STEP_DELIMITER or symbol == THINK_CLOSE:
                    if text.strip() or symbol == THINK_CLOSE:
                        yield text.strip("\n"), symbol, after, prob * p
                else:
                    stack.append((after, text + symbol, prob * p))

    def _advance(
        self, frontier: Dict[State, float], text: Optional[str], closing: str
    ) -> Dict[State, float]:
        out: Dict[State, float] = defaultdict(float)
        for state, weight in frontier.items():
            for step_text, symbol, after, p in self._step_paths(state):
                if symbol != closing:
                    continue
                if step_text == text or (text is None and step_text):
                    out[after] += weight * p
        return out

    def _unseen(self, frontier: Dict[State, float], closing: str) -> Dict[State, float]:
        if not self.collapse:
            return self._advance(frontier, None, closing)
        out: Dict[State, float] = defaultdict(float)
        pending = frontier
        while pending:
            for state, weight in self._advance(pending, None, closing).items():
                out[state] += weight
            pending = self._advance(pending, None, STEP_DELIMITER)
        return out

    def _answers(self, frontier: Dict[State, float]) -> Dict[str, float]:
        lm = self.lm
        answers: Dict[str, float] = defaultdict(float)
        stack = [(state, lm.answer_length, "", weight) for state, weight in frontier.items()]
        while stack:
            (context, length), remaining, text, prob = stack.pop()
            if remaining == 0:
                answers[text] += prob
                continue
            if length >= lm.max_len:
                continue
            for symbol, p in lm.row(context):
                if p > 0:
                    after = (lm.advance(context, symbol), length + 1)
                    stack.append((after, remaining - 1, text + symbol, prob * p))
        return answers

    def posterior(self, think: str) -> Dict[str, float]:
        """
        Return the joint probability of the think region and every answer text.

        Args:
            think (str)
                A think region, possibly holding skip markers.
        Returns:
            Answer texts mapped to probabilities; empty when the model cannot
            produce the think region.
        """
        lm = self.lm
        frontier: Dict[State, float] = {(lm.context(lm.prefix), len(lm.prefix)): 1.0}
        elements = split_steps(think)
        if not elements:
            frontier = self._advance(frontier, "", THINK_CLOSE)
        for position, element in enumerate(elements):
            closing = THINK_CLOSE if position == len(elements) - 1 else STEP_DELIMITER
            if element == self.skip_token:
                frontier = self._unseen(frontier, closing)
            else:
                frontier = self._advance(frontier, element, closing)
            if not frontier:
                return {}
        return self._answers(frontier)

    def answer(self, prompt: str) -> str:
        """Return the most probable answer given the prompt's think region."""
        posterior = self.posterior(think_text(prompt))
        if not posterior:
            log.debug("The model cannot produce the prompt's think region")
            return ""
        return max(sorted(posterior), key=posterior.__getitem__)


@frozen(eq=False)
class JointDistribution:
    """Every complete sequence of a synthetic model with its exact probability."""

    sequences: Tuple[Tuple[str, ...], ...] = field(converter=tuple)
    probs: np.ndarray

    def __len__(self) -> int:
        return len(self.sequences)

    def encoded(self, vocab: Sequence[str]) -> np.ndarray:
        """Return the sequences as a symbol-index matrix padded with -1."""
        index = {symbol: i for i, symbol in enumerate(vocab)}
        width = max((len(s) for s in self.sequences), default=0)
        out = np.full((len(self.sequences), width), -1, dtype=np.int64)
        for row, sequence in enumerate(self.sequences):
            out[row, : len(sequence)] = [index[symbol] for symbol in sequence]
        return out


def exact_joint(lm: SyntheticLm, max_len: int) -> JointDistribution:
    """
    Enumerate every sequence the model can generate after its prefix.

    Sequences stop ``answer_length`` symbols after ``</think>`` or at ``max_len``
    symbols including the prefix; zero-probability branches are skipped.

    Raises:
        ExplosionError: if more than ten million sequences would be enumerated.
    """
    sequences: List[Tuple[str, ...]] = []
    probs: List[float] = []
    budget = max_len - len(lm.prefix)
    stack: List[Tuple[Tuple[str, ...], float, Optional[int]]] = [((), 1.0, None)]
    while stack:
        generated, prob, remaining = stack.pop()
        if remaining == 0 or len(generated) >= budget:
            sequences.append(generated)
            probs.append(prob)
            if len(sequences) > MAX_SEQUENCES:
                raise ExplosionError(f"Enumeration exceeds {MAX_SEQUENCES} sequences")
            continue
        row = lm.row(lm.context(lm.prefix + generated))
        for symbol, p in reversed(row):
            if p <= 0:
                continue
            if remaining is not None:
                after: Optional[int] = remaining - 1
            elif symbol == THINK_CLOSE:
                after = lm.answer_length
            else:
                after = None
            stack.append((generated + (symbol,), prob * p, after))

    log.debug("Enumerated %d sequence(s)", len(sequences))
    return JointDistribution(sequences=sequences, probs=np.asarray(probs, dtype=np.float64))


def random_lm(
    rng: np.random.Generator,
    vocab_size: int,
    order: int = 1,
    support: Tuple[int, int] = (1, 3),
    max_len: int = 12,
    seed: int = 0,
) -> SyntheticLm:
    """
    Draw a random sparse model over symbols ``a``, ``b``, ...

    Every context row puts Dirichlet weights on between ``support[0]`` and
    ``support[1]`` distinct symbols. The model has no prefix and no think tags, so
    its sequences all have length ``max_len``.
    """
    vocab = tuple(chr(ord("a") + i) for i in range(vocab_size))
    rows = {}
    for context in itertools.product((START,) + vocab, repeat=order):
        size = int(rng.integers(support[0], min(support[1], vocab_size) + 1))
        chosen = sorted(rng.choice(vocab_size, size=size, replace=False).tolist())
        weights = rng.dirichlet(np.ones(size))
        weights = weights / weights.sum()
        rows[context] = tuple((vocab[i], float(w)) for i, w in zip(chosen, weights))
    return SyntheticLm(
        vocab=vocab, order=order, rows=rows, seed=seed, prefix=(), answer_length=0, max_len=max_len
    )
