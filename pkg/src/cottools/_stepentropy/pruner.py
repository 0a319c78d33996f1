# SPDX-License-Identifier: GPL-3.0-or-later
import logging
import math
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from attrs import Attribute, field, frozen
from attrs.validators import ge, instance_of, lt
from numpy.random import PCG64

from .errors import PlanMismatch
from .models import CompressedCot, KeptStep, Skip, Strategy
from .models.compressed import Element, unit_interval
from .segmenter import STEP_DELIMITER, THINK_CLOSE, THINK_OPEN, SegmentedTrace
from .utils import UINT64, bounded_draw

log = logging.getLogger("cottools.stepentropy")

DEFAULT_SKIP_TOKEN = "[SKIP]"

# Absorbs representation error so that e.g. 0.57 * 100 counts as 57.
_KAPPA_EPSILON = 1e-9


def _skip_token(instance: Any, attribute: Attribute, value: str) -> None:
    if not value or not value.strip() or "\n\n" in value:
        raise ValueError(f"{attribute.name} must be non-blank and free of step delimiters")


@frozen
class PruneConfig:
    """Parameters of step pruning."""

    kappa: float = field(default=0.8, converter=float, validator=unit_interval)
    """The fraction of steps to prune."""

    strategy: Strategy = field(default=Strategy.LOW_ENTROPY, converter=Strategy.parse)
    seed: int = field(default=0, validator=[instance_of(int), ge(0), lt(UINT64)])
    """Seed of the random strategy."""

    skip_token: str = field(default=DEFAULT_SKIP_TOKEN, validator=[instance_of(str), _skip_token])
    collapse_skips: bool = field(default=False, validator=instance_of(bool))
    """Render runs of consecutive pruned steps as a single marker."""


@frozen
class PrunePlan:
    """The outcome of step selection for one trace."""

    pruned_indices: FrozenSet[int] = field(converter=frozenset)
    kept_indices: FrozenSet[int] = field(converter=frozenset)
    k_target: int = field(validator=[instance_of(int), ge(0)])
    ranking: Tuple[Tuple[int, float], ...] = field(converter=tuple)
    """Every step as ``(index, entropy_bits)`` in selection order."""

    strategy: Strategy = field(converter=Strategy.parse)
    kappa: float = field(converter=float, validator=unit_interval)
    seed: int = 0

    def __attrs_post_init__(self) -> None:
        if len(self.pruned_indices) != self.k_target:
            raise PlanMismatch(
                f"Plan prunes {len(self.pruned_indices)} steps instead of {self.k_target}"
            )
        if self.pruned_indices & self.kept_indices:
            raise PlanMismatch("A step cannot be both pruned and kept")

    @property
    def n_steps(self) -> int:
        """Return the number of steps the plan covers."""
        return len(self.pruned_indices) + len(self.kept_indices)


def k_target(kappa: float, n_steps: int) -> int:
    """Return the number of steps to prune, ``floor(kappa * n_steps)``."""
    return int(math.floor(kappa * n_steps + _KAPPA_EPSILON))


def random_order(n_steps: int, seed: int) -> List[int]:
    """
    Return a seeded uniform permutation of ``range(n_steps)``.

    The permutation is a Fisher-Yates shuffle driven by the raw 64-bit output
    stream of the PCG64 bit generator, whose stream is stable across platforms and
    numpy releases. Taking prefixes of one permutation makes random selections
    nested across pruning ratios.
    """
    generator = PCG64(seed)
    order = list(range(n_steps))
    for i in range(n_steps - 1, 0, -1):
        j = bounded_draw(generator, i + 1)
        order[i], order[j] = order[j], order[i]
    return order


def select(entropies: Sequence[float], config: PruneConfig) -> PrunePlan:
    """
    Select the steps to prune.

    Ties are broken by the lower step index being selected first.

    Args:
        entropies (list)
            The step entropies in step order.
        config (PruneConfig)
            The pruning ratio, strategy and seed.
    Returns:
        The plan pruning ``floor(kappa * N)`` steps.
    """
    values = [float(e) for e in entropies]
    if not all(math.isfinite(e) for e in values):
        raise ValueError("Step entropies must be finite")

    n_steps = len(values)
    if config.strategy == Strategy.LOW_ENTROPY:
        order = sorted(range(n_steps), key=lambda i: (values[i], i))
    elif config.strategy == Strategy.HIGH_ENTROPY:
        order = sorted(range(n_steps), key=lambda i: (-values[i], i))
    else:
        order = random_order(n_steps, config.seed)

    k = k_target(config.kappa, n_steps)
    return PrunePlan(
        pruned_indices=order[:k],
        kept_indices=order[k:],
        k_target=k,
        ranking=[(i, values[i]) for i in order],
        strategy=config.strategy,
        kappa=config.kappa,
        seed=config.seed,
    )


def _render(elements: Sequence[Element], skip_token: str, collapse: bool) -> Tuple[str, int]:
    parts: List[str] = []
    markers = 0
    previous_skip = False
    for element in elements:
        if isinstance(element, Skip):
            if not (collapse and previous_skip):
                parts.append(skip_token)
                markers += 1
            previous_skip = True
        else:
            parts.append(element.text)
            previous_skip = False
    return STEP_DELIMITER.join(parts), markers


def render_elements(elements: Sequence[Element], skip_token: str, collapse: bool = False) -> str:
    """Render compressed elements into think text joined by ``\\n\\n``."""
    return _render(elements, skip_token, collapse)[0]


def build_prompt(problem: str, compressed_think: str) -> str:
    """Assemble the compressed-inference prompt asking only for the final answer."""
    return f"{problem}\n{THINK_OPEN}\n{compressed_think}\n{THINK_CLOSE}\n"


def compress(segmented: SegmentedTrace, plan: PrunePlan, config: PruneConfig) -> CompressedCot:
    """
    Replace the pruned steps by skip markers, keeping the others verbatim.

    Raises:
        PlanMismatch: if the plan does not cover exactly the trace's steps.
    """
    n_steps = len(segmented.steps)
    indices = plan.pruned_indices | plan.kept_indices
    if plan.n_steps != n_steps or indices != frozenset(range(n_steps)):
        raise PlanMismatch(
            f"Trace {segmented.source.id}: plan covers {sorted(indices)} "
            f"but the trace has {n_steps} step(s)"
        )

    elements: List[Element] = [
        Skip(step.index) if step.index in plan.pruned_indices else KeptStep(step.index, step.text)
        for step in segmented.steps
    ]
    think, markers = _render(elements, config.skip_token, config.collapse_skips)
    return CompressedCot(
        source_id=segmented.source.id,
        kappa=plan.kappa,
        strategy=plan.strategy,
        elements=elements,
        inference_prompt=build_prompt(segmented.source.problem, think),
        compressed_think=think,
        skip_markers=markers,
    )


def _pruned_tokens(original: SegmentedTrace, compressed: CompressedCot) -> int:
    return sum(len(original.steps[i].token_span) for i in compressed.pruned_indices)


def token_reduction(original: SegmentedTrace, compressed: CompressedCot) -> float:
    """
    Return the fraction of think tokens saved by the compression.

    Kept steps count their tokens and every skip marker counts as one token.
    A trace without steps saves nothing.
    """
    total = original.think_token_count
    if total == 0:
        return 0.0
    kept = total - _pruned_tokens(original, compressed) + compressed.skip_markers
    return min(1.0, max(0.0, 1.0 - kept / total))


def compressed_token_count(original: SegmentedTrace, compressed: CompressedCot) -> int:
    """Return the completion token count after replacing pruned steps by their markers."""
    pruned = _pruned_tokens(original, compressed)
    return len(original.source.tokens) - pruned + compressed.skip_markers


def compressed_record(
    original: SegmentedTrace, compressed: CompressedCot, reduction: Optional[float] = None
) -> Dict[str, Any]:
    """Return the compressed dataset record of one trace."""
    if reduction is None:
        reduction = token_reduction(original, compressed)
    record: Dict[str, Any] = {
        "id": compressed.source_id,
        "problem": original.source.problem,
        "compressed_think": compressed.compressed_think,
        "inference_prompt": compressed.inference_prompt,
        "kappa": compressed.kappa,
        "strategy": str(compressed.strategy),
        "pruned_indices": list(compressed.pruned_indices),
        "token_reduction": reduction,
        "compressed_tokens": compressed_token_count(original, compressed),
    }
    if original.source.ground_truth is not None:
        record["ground_truth"] = original.source.ground_truth
    return record


def prune_trace(
    segmented: SegmentedTrace, entropies: Sequence[float], config: PruneConfig
) -> Tuple[PrunePlan, CompressedCot]:
    """Select and compress in one go."""
    plan = select(entropies, config)
    return plan, compress(segmented, plan, config)
