# SPDX-License-Identifier: GPL-3.0-or-later
import json
import logging
import os
from collections import defaultdict
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from attrs import asdict, evolve, field, frozen
from attrs.validators import deep_iterable, ge, instance_of, lt
from more_executors import Executors

from ..backends import Backend
from ..entropy import measure
from ..errors import ValidationError
from ..models import EvalMode, Strategy, TraceRecord
from ..models.compressed import unit_interval
from ..pruner import PruneConfig, build_prompt, prune_trace
from ..reward import extract_answer, normalized_equal
from ..utils import UINT64, config_hash, derive_seed, dump_line, ordered_map

log = logging.getLogger("cottools.stepentropy")

DEFAULT_RATIOS = tuple(round(0.1 * i, 10) for i in range(1, 11))

# Outcome of one trace under one (strategy, kappa): (correct, kept tokens, original tokens)
Outcome = Tuple[int, int, int]


def _ratios(value: Iterable[Any]) -> Tuple[float, ...]:
    return tuple(float(v) for v in value)


def _strategies(value: Iterable[Any]) -> Tuple[Strategy, ...]:
    return tuple(Strategy.parse(v) for v in value)


def _ascending(instance: Any, attribute: Any, value: Tuple[float, ...]) -> None:
    if any(b <= a for a, b in zip(value, value[1:])):
        raise ValueError(f"{attribute.name} must be strictly ascending")


@frozen
class SweepSpec:
    """The pruning ratios and strategies of a sweep and how answers are obtained."""

    ratios: Tuple[float, ...] = field(
        default=DEFAULT_RATIOS,
        converter=_ratios,
        validator=[deep_iterable(unit_interval), _ascending],
    )
    strategies: Tuple[Strategy, ...] = field(default=tuple(Strategy), converter=_strategies)
    eval: EvalMode = field(default=EvalMode.SYNTHETIC, converter=EvalMode)
    samples: int = field(default=200, validator=[instance_of(int), ge(1)])
    """Size of the synthetic task family when no traces are supplied."""

    seed: int = field(default=0, validator=[instance_of(int), ge(0), lt(UINT64)])
    """Seed of the synthetic task family; the random strategy follows the pruning seed."""

    checkpoint: Optional[str] = field(default=None)
    """Checkpoint path; the CLI defaults it next to the report."""

    @strategies.validator
    def _check_strategies(self, attribute: Any, value: Tuple[Strategy, ...]) -> None:
        if not value or len(set(value)) != len(value):
            raise ValueError("strategies must be a non-empty list without duplicates")


@frozen
class SweepRow:
    """Aggregated outcome of one (strategy, kappa) cell."""

    strategy: str
    kappa: float
    accuracy: float
    kept_think_tokens: int
    original_think_tokens: int
    token_usage_ratio: float
    n_samples: int

    @property
    def removed_ratio(self) -> float:
        """Return the fraction of think tokens the compression removed."""
        return 1.0 - self.token_usage_ratio


def _row_key(row: SweepRow) -> Tuple[str, float]:
    return (row.strategy, row.kappa)


@frozen
class SweepReport:
    """Every row of a sweep with the provenance needed to reproduce it."""

    rows: Tuple[SweepRow, ...] = field(converter=lambda rows: tuple(sorted(rows, key=_row_key)))
    config_hash: str = ""
    seed: int = 0

    def row(self, strategy: str, kappa: float) -> SweepRow:
        """Return the row of a cell."""
        for row in self.rows:
            if row.strategy == strategy and abs(row.kappa - kappa) < 1e-12:
                return row
        raise KeyError(f"No row for {strategy} at kappa {kappa}")

    def series(self, strategy: str) -> List[SweepRow]:
        """Return the rows of one strategy in ascending kappa."""
        return [row for row in self.rows if row.strategy == strategy]

    def to_dict(self) -> Dict[str, Any]:
        """Return the JSON layout of the report."""
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "rows": [asdict(row) for row in self.rows],
        }

    def to_json(self) -> str:
        """Serialize the report deterministically."""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepReport":
        """Rebuild a report from its JSON layout."""
        try:
            rows = [SweepRow(**row) for row in data["rows"]]
            return cls(rows=rows, config_hash=data.get("config_hash", ""), seed=data.get("seed", 0))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"Malformed sweep report: {exc}") from exc


def aggregate(
    outcomes: Iterable[Dict[str, List[Outcome]]],
    labels: Sequence[str],
    ratios: Sequence[float],
    seed: int = 0,
    digest: str = "",
) -> SweepReport:
    """
    Sum per-trace outcomes into report rows.

    Sums are over integers so the result does not depend on the processing order.
    """
    correct: Dict[Tuple[str, int], int] = defaultdict(int)
    kept: Dict[Tuple[str, int], int] = defaultdict(int)
    original: Dict[Tuple[str, int], int] = defaultdict(int)
    count = 0
    for outcome in outcomes:
        count += 1
        for label in labels:
            for position, (ok, k, o) in enumerate(outcome[label]):
                correct[label, position] += ok
                kept[label, position] += k
                original[label, position] += o

    rows = []
    for label in labels:
        for position, kappa in enumerate(ratios):
            total = original[label, position]
            rows.append(
                SweepRow(
                    strategy=label,
                    kappa=kappa,
                    accuracy=correct[label, position] / count if count else 0.0,
                    kept_think_tokens=kept[label, position],
                    original_think_tokens=total,
                    token_usage_ratio=kept[label, position] / total if total else 1.0,
                    n_samples=count,
                )
            )
    return SweepReport(rows=rows, config_hash=digest, seed=seed)


def is_correct(answer: str, ground_truth: str) -> int:
    """Grade a generated answer with the reward comparator."""
    extracted = extract_answer(answer)
    return int(extracted is not None and normalized_equal(extracted, ground_truth))


def require_truth(trace: TraceRecord) -> str:
    if not trace.ground_truth:
        raise ValidationError(f"Trace {trace.id} has no ground_truth")
    return trace.ground_truth


def _evaluate_steps(
    trace: TraceRecord, spec: SweepSpec, backend: Backend, prune_config: PruneConfig
) -> Dict[str, List[Outcome]]:
    truth = require_truth(trace)
    segmented, report = measure(trace)
    original = segmented.think_token_count
    out: Dict[str, List[Outcome]] = {}
    for strategy in spec.strategies:
        seed = derive_seed(prune_config.seed, trace.id) if strategy == Strategy.RANDOM else 0
        cells = []
        for kappa in spec.ratios:
            config = evolve(prune_config, kappa=kappa, strategy=strategy, seed=seed)
            plan, compressed = prune_trace(segmented, report.per_step_bits, config)
            pruned = sum(len(segmented.steps[i].token_span) for i in plan.pruned_indices)
            ok = is_correct(backend.answer(compressed.inference_prompt), truth)
            cells.append((ok, original - pruned + compressed.skip_markers, original))
        out[str(strategy)] = cells
    return out


def _load_checkpoint(path: str, digest: str) -> Dict[str, Dict[str, List[Outcome]]]:
    done: Dict[str, Dict[str, List[Outcome]]] = {}
    if not os.path.exists(path):
        return done
    with open(path, "r", encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            try:
                entry = json.loads(line)
                if entry["config_hash"] != digest:
                    continue
                done[entry["trace_id"]] = {
                    label: [tuple(cell) for cell in cells]  # type: ignore[misc]
                    for label, cells in entry["result"].items()
                }
            except (ValueError, KeyError, TypeError, AttributeError):
                log.warning("Ignoring malformed checkpoint line %d of %s", number, path)
    log.info("Resuming from %s: %d trace(s) already evaluated", path, len(done))
    return done


def run_outcomes(
    traces: Iterable[TraceRecord],
    evaluate: Callable[[TraceRecord], Dict[str, List[Outcome]]],
    digest: str,
    checkpoint: Optional[str] = None,
    jobs: Optional[int] = None,
) -> List[Dict[str, List[Outcome]]]:
    """
    Evaluate every trace on a bounded worker pool, resuming from a checkpoint.

    Results are appended to the checkpoint as ``{"config_hash", "trace_id",
    "result"}`` lines as soon as they are available in input order, so an
    interrupted run loses at most the traces still in flight.
    """
    done = _load_checkpoint(checkpoint, digest) if checkpoint else {}
    workers = jobs or int(os.environ.get("STEPENTROPY_SWEEP_THREADS", os.cpu_count() or 1))
    seen: Set[str] = set()
    outcomes = []

    def pending() -> Iterable[TraceRecord]:
        for trace in traces:
            if trace.id in seen:
                raise ValidationError(f"Duplicate trace id {trace.id}")
            seen.add(trace.id)
            if trace.id in done:
                outcomes.append(done[trace.id])
            else:
                yield trace

    def work(trace: TraceRecord) -> Tuple[str, Dict[str, List[Outcome]]]:
        return trace.id, evaluate(trace)

    sink = open(checkpoint, "a", encoding="utf-8") if checkpoint else None
    try:
        with Executors.thread_pool(
            name="cottools-stepentropy-sweep", max_workers=workers
        ) as executor:
            for trace_id, result in ordered_map(executor, work, pending(), workers * 4):
                outcomes.append(result)
                if sink:
                    entry = {"config_hash": digest, "trace_id": trace_id, "result": result}
                    sink.write(dump_line(entry) + "\n")
                    sink.flush()
    finally:
        if sink:
            sink.close()
    return outcomes


def sweep_hash(
    spec: SweepSpec, prune_config: PruneConfig, backend: Optional[Backend] = None
) -> str:
    """Return the configuration digest keying checkpoints of a sweep."""
    settings = asdict(spec)
    settings.pop("checkpoint")
    settings.pop("samples")
    answers = backend.settings() if backend else {}
    return config_hash({"sweep": settings, "prune": asdict(prune_config), "backend": answers})


def sweep(
    traces: Iterable[TraceRecord],
    spec: SweepSpec,
    backend: Backend,
    prune_config: Optional[PruneConfig] = None,
    checkpoint: Optional[str] = None,
    jobs: Optional[int] = None,
    digest: Optional[str] = None,
) -> SweepReport:
    """
    Evaluate every strategy at every pruning ratio.

    Each trace is compressed per (strategy, kappa), its inference prompt answered
    by ``backend`` and the answer graded against the trace's ground truth. The
    random strategy draws its permutation from a seed derived from the pruning
    seed and the trace id.

    Args:
        traces (iterable)
            Traces carrying ground truths.
        spec (SweepSpec)
            The ratios and strategies.
        backend (Backend)
            Produces the final answers.
        prune_config (PruneConfig, optional)
            The random strategy seed, skip token and rendering options.
        checkpoint (str, optional)
            File recording finished traces; a rerun with the same configuration
            skips them.
        jobs (int, optional)
            Worker count.
        digest (str, optional)
            The configuration digest; computed from ``spec`` when omitted.
    Returns:
        The aggregated report.
    Raises:
        ValidationError: if a trace lacks a ground truth.
        BackendError: if answering fails; finished traces stay in the checkpoint.
    """
    prune_config = prune_config or PruneConfig()
    digest = digest or sweep_hash(spec, prune_config, backend)

    def evaluate(trace: TraceRecord) -> Dict[str, List[Outcome]]:
        return _evaluate_steps(trace, spec, backend, prune_config)  # type: ignore[arg-type]

    outcomes = run_outcomes(traces, evaluate, digest, checkpoint or spec.checkpoint, jobs)
    labels = [str(s) for s in spec.strategies]
    report = aggregate(outcomes, labels, spec.ratios, seed=spec.seed, digest=digest)
    log.info("Sweep over %d trace(s) finished", len(outcomes))
    return report


def strategy_ordering(report: SweepReport) -> List[Tuple[float, List[str]]]:
    """Return, per kappa, the strategies from most to least accurate."""
    by_kappa: Dict[float, List[SweepRow]] = defaultdict(list)
    for row in report.rows:
        by_kappa[row.kappa].append(row)
    return [
        (kappa, [r.strategy for r in sorted(rows, key=lambda r: (-r.accuracy, r.strategy))])
        for kappa, rows in sorted(by_kappa.items())
    ]


def no_thinking_accuracy(traces: Iterable[TraceRecord], backend: Backend) -> float:
    """Return the accuracy of prompts with an empty think region."""
    total = correct = 0
    for trace in traces:
        correct += is_correct(backend.answer(build_prompt(trace.problem, "")), require_truth(trace))
        total += 1
    return correct / total if total else 0.0
