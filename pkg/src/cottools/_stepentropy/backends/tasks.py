# SPDX-License-Identifier: GPL-3.0-or-later
import functools
import logging
import re
from typing import Dict, Iterator, List, Optional, Set, Tuple

from attrs import evolve, field, frozen
from attrs.validators import deep_iterable, ge, instance_of

from ..models import TraceRecord
from ..pruner import DEFAULT_SKIP_TOKEN
from ..reward import extract_answer
from ..segmenter import STEP_DELIMITER, THINK_CLOSE, THINK_OPEN
from .base import register_backend
from .synthetic import START, Context, ExactReader, Row, SyntheticLm, synth_generate

log = logging.getLogger("cottools.stepentropy")

OPENERS: Row = (("Okay", 0.85), ("Right", 0.10), ("Alright", 0.05))

DECISION = re.compile(r"^(\d+)\. add (\d+)$")


@frozen
class TaskFamilySpec:
    """
    Parameters of the synthetic arithmetic task family.

    Every task opens with ``min_fillers`` to ``max_fillers`` numbered filler steps
    followed by a count of decision steps drawn from ``decisions``. A decision
    ``add d`` draws ``d`` uniformly from ``1..base`` and states the running total,
    and the answer is the last total. Fillers carry no answer information.
    """

    count: int = field(default=200, validator=[instance_of(int), ge(1)])
    seed: int = field(default=0, validator=[instance_of(int), ge(0)])
    min_fillers: int = field(default=6, validator=[instance_of(int), ge(1)])
    max_fillers: int = field(default=10, validator=[instance_of(int), ge(1)])
    decisions: Tuple[int, ...] = field(
        default=(1, 2),
        converter=tuple,
        validator=deep_iterable(instance_of(int)),
    )
    base: int = field(default=8, validator=[instance_of(int), ge(2)])

    def __attrs_post_init__(self) -> None:
        if self.max_fillers < self.min_fillers:
            raise ValueError("max_fillers must not be lower than min_fillers")
        if not self.decisions or min(self.decisions) < 1:
            raise ValueError("decisions must be positive step counts")

    @property
    def max_steps(self) -> int:
        """Return the longest think region of the family, in steps."""
        return self.max_fillers + max(self.decisions)


def _counter(k: int, last: bool) -> str:
    return f", step {k} of {k}" if last else f", step {k}"


def _decision(j: int, digit: int) -> str:
    return f"{j}. add {digit}"


def _total(total: int) -> str:
    return f", total {total}"


def _answer(total: int) -> str:
    return f" \\boxed{{{total}}}"


def _split(more: int, stop: int) -> Tuple[float, float]:
    """Return the probabilities of continuing and stopping given outcome counts."""
    return more / (more + stop), stop / (more + stop)


def _row(*entries: Tuple[str, float]) -> Row:
    return tuple((symbol, p) for symbol, p in entries if p > 0)


def _filler_rows(spec: TaskFamilySpec, rows: Dict[Context, Row]) -> None:
    rows[(START, START, THINK_OPEN)] = OPENERS
    words = [word for word, _ in OPENERS]
    first = _row(*((_decision(1, d), 1.0 / spec.base) for d in range(1, spec.base + 1)))
    for k in range(1, spec.max_fillers + 1):
        # the filler count is uniform, so stopping at k has hazard 1 / (max - k + 1)
        if k < spec.min_fillers:
            more, stop = 1.0, 0.0
        else:
            more, stop = _split(spec.max_fillers - k, 1)
        counter = _row((_counter(k, False), more), (_counter(k, True), stop))
        before = (START, THINK_OPEN) if k == 1 else (_counter(k - 1, False), STEP_DELIMITER)
        for word in words:
            rows[before + (word,)] = counter
            for symbol, _ in counter:
                rows[(before[-1], word, symbol)] = ((STEP_DELIMITER, 1.0),)
                last = symbol == _counter(k, True)
                rows[(word, symbol, STEP_DELIMITER)] = first if last else OPENERS


def _decision_rows(spec: TaskFamilySpec, rows: Dict[Context, Row]) -> None:
    digits = range(1, spec.base + 1)
    uniform = 1.0 / spec.base
    for k in range(spec.min_fillers, spec.max_fillers + 1):
        for d in digits:
            rows[(_counter(k, True), STEP_DELIMITER, _decision(1, d))] = ((_total(d), 1.0),)

    reached: Set[Tuple[int, int]] = {(d, d) for d in digits}
    for j in range(1, max(spec.decisions) + 1):
        more, stop = _split(
            sum(1 for m in spec.decisions if m > j), sum(1 for m in spec.decisions if m == j)
        )
        after: Set[Tuple[int, int]] = set()
        for d, total in reached:
            rows[(STEP_DELIMITER, _decision(j, d), _total(total))] = _row(
                (STEP_DELIMITER, more), (THINK_CLOSE, stop)
            )
            if stop > 0:
                rows[(_decision(j, d), _total(total), THINK_CLOSE)] = ((_answer(total), 1.0),)
            if more > 0:
                rows[(_decision(j, d), _total(total), STEP_DELIMITER)] = tuple(
                    (_decision(j + 1, e), uniform) for e in digits
                )
                for e in digits:
                    rows[(_total(total), STEP_DELIMITER, _decision(j + 1, e))] = (
                        (_total(total + e), 1.0),
                    )
                    after.add((e, total + e))
        reached = after


@functools.lru_cache(maxsize=16)
def task_lm(spec: TaskFamilySpec) -> SyntheticLm:
    """
    Return the order-3 synthetic model generating the tasks of a family.

    A filler step is an opener followed by its step counter; the counter of the
    last filler says so. A decision step is its ordinal with the drawn digit
    followed by the running total, and the symbol after the last total closes the
    think region. The boxed total follows ``</think>``.
    """
    rows: Dict[Context, Row] = {}
    _filler_rows(spec, rows)
    _decision_rows(spec, rows)
    log.debug("Synthetic task model with %d contexts", len(rows))
    symbols: List[str] = [THINK_OPEN]
    for row in rows.values():
        symbols.extend(symbol for symbol, _ in row)
    return SyntheticLm(
        vocab=tuple(dict.fromkeys(symbols)),
        order=3,
        rows=rows,
        seed=spec.seed,
        prefix=(THINK_OPEN,),
        answer_length=1,
        max_len=3 * spec.max_steps + 2,
    )


def synthetic_task(index: int, spec: TaskFamilySpec) -> TraceRecord:
    """Generate the ``index``-th task of a family; the same inputs give the same trace."""
    trace = synth_generate(f"synthetic-{index:05d}", task_lm(spec))
    decisions = sum(1 for token in trace.tokens if DECISION.match(token.text))
    return evolve(
        trace,
        problem=f"Task {index}: add up every number you are told to add.",
        ground_truth=extract_answer(trace.raw_completion),
        meta={"model": "synthetic-tasks", "seed": spec.seed, "decisions": decisions},
    )


def task_family(spec: TaskFamilySpec) -> Iterator[TraceRecord]:
    """Yield the tasks of a family in index order."""
    for index in range(spec.count):
        yield synthetic_task(index, spec)


class SyntheticReader(ExactReader):
    """
    Answer compressed prompts of the synthetic task family with its own model.

    The answer is certain exactly when the prompt pins down the last running
    total; otherwise the reader settles for the most probable total. Accuracy
    therefore measures whether pruning kept the information the answer depends on.
    """

    name = "synthetic"

    def __init__(
        self,
        spec: Optional[TaskFamilySpec] = None,
        skip_token: str = DEFAULT_SKIP_TOKEN,
        collapse: bool = False,
    ):
        lm = task_lm(spec or TaskFamilySpec())
        super(SyntheticReader, self).__init__(lm, skip_token, collapse)


register_backend(SyntheticReader, "synthetic")
